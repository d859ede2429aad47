/**
 * App shell: hash routes #/annotate/<page> and #/rate/<rater>, with a landing
 * page listing the workspace's pages.
 */

import { WorkbenchApi } from "./api";
import { mountAnnotator } from "./annotate";
import { mountRater } from "./rate";

const api = new WorkbenchApi("");

async function renderLanding(root: HTMLElement): Promise<void> {
  const pages = await api.listPages();
  root.innerHTML = `
    <h1>mrweb workbench</h1>
    <section>
      <h2>Annotate</h2>
      <ul>
        ${pages
          .map(
            (page) =>
              `<li><a href="#/annotate/${page.id}">${page.id}</a> (${page.width}×${page.height})</li>`,
          )
          .join("")}
      </ul>
    </section>
    <section>
      <h2>Rate</h2>
      <form class="rater-form">
        <label>Rater id <input name="rater" required placeholder="rater-01"></label>
        <button type="submit">Start rating</button>
      </form>
    </section>`;
  root.querySelector<HTMLFormElement>(".rater-form")!.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(event.target as HTMLFormElement);
    location.hash = `#/rate/${encodeURIComponent(String(data.get("rater")))}`;
  });
}

async function route(): Promise<void> {
  const root = document.querySelector<HTMLElement>("#app");
  if (!root) {
    return;
  }
  const hash = location.hash.replace(/^#\/?/, "");
  const [view, argument] = hash.split("/", 2);
  try {
    if (view === "annotate" && argument) {
      await mountAnnotator(root, api, decodeURIComponent(argument));
    } else if (view === "rate" && argument) {
      await mountRater(root, api, decodeURIComponent(argument));
    } else {
      await renderLanding(root);
    }
  } catch (error) {
    root.innerHTML = `<p class="error">failed to load: ${String(error)}</p>`;
  }
}

window.addEventListener("hashchange", () => void route());
void route();
