import { ReviewClient } from "./client.js";
import { actionForKey } from "./keyboard.js";
import { renderCompletion, renderItem, renderStats } from "./render.js";
import { ReviewSession } from "./session.js";

const main = document.getElementById("main")!;
const statsBar = document.getElementById("stats")!;

const params = new URLSearchParams(window.location.search);
const reviewer = params.get("reviewer") ?? "anonymous";
const client = new ReviewClient("");
const session = new ReviewSession(client, reviewer, {
  blind: params.get("blind") === "1",
});

function show(): void {
  const item = session.currentItem();
  main.innerHTML = item ? renderItem(item, session.blind) : renderCompletion("/api/export?format=tsv");
  statsBar.innerHTML = renderStats(session.stats());
}

async function act(action: string): Promise<void> {
  try {
    if (action === "accept" || action === "reject") {
      await session.submitVerdict(action);
    } else if (action === "skip") {
      await session.skip();
    } else if (action === "toggle-blind") {
      session.blind = !session.blind;
    }
    show();
  } catch (err) {
    // network hiccup: keep the current item, offer a retry
    main.innerHTML =
      `<p class="error">${String(err)}</p>` +
      '<button data-action="retry">Retry</button>';
  }
}

main.addEventListener("click", (evt) => {
  const target = evt.target as HTMLElement;
  const action = target.dataset?.action;
  if (action === "retry") {
    void session.fetchNext().then(show);
  } else if (action) {
    void act(action);
  }
});

document.addEventListener("keydown", (evt) => {
  const action = actionForKey(evt);
  if (action !== null && session.currentItem() !== null) {
    evt.preventDefault();
    void act(action);
  }
});

void session.fetchNext().then(show);
