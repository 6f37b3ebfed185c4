import { ApiClient } from "./api.js";
import type { PageContext } from "./context.js";
import { SessionState, type PageName } from "./state.js";
import { renderMapPage } from "./pages/map.js";
import { renderComposePage } from "./pages/compose.js";
import { renderSelectPage } from "./pages/select.js";
import { renderPerformPage } from "./pages/perform.js";
import { renderReviewPage } from "./pages/review.js";
import { renderLeaderboardPage } from "./pages/leaderboard.js";

export const PAGES: Record<PageName, (root: HTMLElement, ctx: PageContext) => Promise<void>> = {
  map: renderMapPage,
  compose: renderComposePage,
  select: renderSelectPage,
  perform: renderPerformPage,
  review: renderReviewPage,
  leaderboard: renderLeaderboardPage,
};

export function createApp(root: HTMLElement, api: ApiClient, session: SessionState) {
  const nav = document.createElement("nav");
  nav.className = "top-nav";
  const outlet = document.createElement("main");
  outlet.className = "page-outlet";
  const errorBar = document.createElement("p");
  errorBar.className = "error-bar";

  const navigate = (page: PageName) => {
    session.currentPage = page;
    for (const button of nav.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.page === page);
    }
    errorBar.textContent = "";
    void PAGES[page](outlet, { api, session, navigate }).catch((error) => {
      errorBar.textContent = String(error);
    });
  };

  // every page is one click away from every other: no dead ends
  (Object.keys(PAGES) as PageName[]).forEach((page) => {
    const button = document.createElement("button");
    button.dataset.page = page;
    button.textContent = page;
    button.addEventListener("click", () => navigate(page));
    nav.appendChild(button);
  });

  root.innerHTML = "";
  root.appendChild(nav);
  root.appendChild(errorBar);
  root.appendChild(outlet);
  return { navigate, outlet, nav };
}

async function boot() {
  const root = document.getElementById("app");
  if (!root) return;
  const api = new ApiClient("");
  const session = new SessionState();

  const form = document.createElement("div");
  form.className = "join-form";
  const name = document.createElement("input");
  name.placeholder = "display name";
  const join = document.createElement("button");
  join.textContent = "Join the game";
  join.addEventListener("click", async () => {
    session.player = await api.register(name.value || "player");
    createApp(root, api, session).navigate("map");
  });
  form.appendChild(name);
  form.appendChild(join);
  root.appendChild(form);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot();
}
