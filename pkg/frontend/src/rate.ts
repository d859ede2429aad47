/**
 * Side-by-side Likert rating of reference vs generated screenshots.
 *
 * Every choice posts immediately; failed posts land in an ordered retry
 * queue that flushes on the next successful connection, and pairs in the
 * queue are excluded from task requests so the rater can keep going offline.
 */

import type { RatingRecord, RatingTask, WorkbenchClient } from "./api";
import { ApiError } from "./api";

export const LIKERT_LABELS: Record<number, string> = {
  1: "Highly Dissimilar",
  2: "Dissimilar",
  3: "Moderately Similar",
  4: "Similar",
  5: "Highly Similar",
};

export interface RatingEvents {
  onTask?(task: RatingTask | null): void;
  onQueueChange?(pending: number): void;
  onNotice?(message: string): void;
}

export class RatingSession {
  current: RatingTask | null = null;
  /** Ratings accepted locally, counted whether posted or still queued. */
  completed = 0;
  private queue: RatingRecord[] = [];

  constructor(
    private readonly api: WorkbenchClient,
    public readonly rater: string,
    private readonly events: RatingEvents = {},
  ) {}

  get pending(): number {
    return this.queue.length;
  }

  get queuedPairs(): string[] {
    return this.queue.map((record) => record.pair);
  }

  async start(): Promise<void> {
    await this.advance();
  }

  private async advance(): Promise<void> {
    try {
      const task = await this.api.nextRatingTask(this.rater, this.queuedPairs);
      this.current = task.pair === null ? null : task;
      this.completed = task.completed + this.queue.length;
      this.events.onTask?.(this.current);
    } catch {
      this.current = null;
      this.events.onNotice?.("offline: cannot fetch the next pair");
      this.events.onTask?.(null);
    }
  }

  /**
   * Record the choice for the current pair (score 1-5) and advance.
   * Network failures queue the rating instead of losing it.
   */
  async rate(score: number): Promise<void> {
    if (!this.current || this.current.pair === null) {
      return;
    }
    if (!Number.isInteger(score) || score < 1 || score > 5) {
      this.events.onNotice?.(`ignored out-of-range score ${score}`);
      return;
    }
    const record: RatingRecord = { rater: this.rater, pair: this.current.pair, score };
    this.queue.push(record);
    this.events.onQueueChange?.(this.queue.length);
    await this.flush();
    await this.advance();
  }

  /** Post queued ratings in original order; stops at the first network failure. */
  async flush(): Promise<void> {
    while (this.queue.length > 0) {
      const record = this.queue[0];
      try {
        await this.api.postRating(record);
      } catch (error) {
        if (error instanceof ApiError) {
          // the server refused this record (duplicate, bad pair): surface it
          // and drop it so the rest of the queue can proceed
          this.queue.shift();
          this.events.onQueueChange?.(this.queue.length);
          this.events.onNotice?.(
            `rating for ${record.pair} rejected: ${error.message}`,
          );
          continue;
        }
        this.events.onNotice?.(
          `offline: ${this.queue.length} rating(s) queued for retry`,
        );
        return;
      }
      this.queue.shift();
      this.events.onQueueChange?.(this.queue.length);
    }
  }
}

/** Wire the rating view into `root`; keyboard keys 1-5 submit choices. */
export async function mountRater(
  root: HTMLElement,
  api: WorkbenchClient,
  rater: string,
): Promise<RatingSession> {
  root.innerHTML = `
    <div class="rater">
      <div class="pair">
        <figure><img class="reference" alt="reference"><figcaption>Reference</figcaption></figure>
        <figure><img class="generated" alt="generated"><figcaption>Generated</figcaption></figure>
      </div>
      <div class="choices">
        ${[1, 2, 3, 4, 5]
          .map(
            (score) =>
              `<button class="choice" data-score="${score}">${score}<br>${LIKERT_LABELS[score]}</button>`,
          )
          .join("")}
      </div>
      <div class="progress"></div>
      <div class="notice" role="status"></div>
    </div>`;

  const referenceImg = root.querySelector<HTMLImageElement>(".reference")!;
  const generatedImg = root.querySelector<HTMLImageElement>(".generated")!;
  const progress = root.querySelector<HTMLDivElement>(".progress")!;
  const notice = root.querySelector<HTMLDivElement>(".notice")!;

  const session = new RatingSession(api, rater, {
    onTask(task) {
      if (task === null) {
        referenceImg.removeAttribute("src");
        generatedImg.removeAttribute("src");
        progress.textContent = "none remaining";
        return;
      }
      referenceImg.src = task.reference_image ?? "";
      generatedImg.src = task.generated_image ?? "";
      progress.textContent = `${session.completed} of ${task.total} rated`;
    },
    onQueueChange(pending) {
      notice.textContent = pending > 0 ? `${pending} rating(s) queued` : "";
    },
    onNotice(message) {
      notice.textContent = message;
    },
  });

  root.querySelectorAll<HTMLButtonElement>(".choice").forEach((button) => {
    button.addEventListener("click", () => {
      void session.rate(Number(button.dataset.score));
    });
  });
  const onKey = (event: KeyboardEvent) => {
    const score = Number(event.key);
    if (score >= 1 && score <= 5) {
      void session.rate(score);
    }
  };
  root.ownerDocument.addEventListener("keydown", onKey);
  root.ownerDocument.defaultView?.addEventListener("online", () => {
    void session.flush().then(() => session.start());
  });

  await session.start();
  return session;
}
