import type { PageContext } from "../context.js";
import { describeConfig } from "../types.js";

/** Request browser: friends' open requests; choosing one starts the perform flow. */
export async function renderSelectPage(root: HTMLElement, ctx: PageContext): Promise<void> {
  const requests = await ctx.api.listRequests("OPEN");
  const answerable = requests.filter((r) => r.requester_id !== ctx.session.playerId);

  root.innerHTML = "";
  const page = document.createElement("div");
  page.className = "select-page";
  const heading = document.createElement("h2");
  heading.textContent = "Open requests from friends";
  page.appendChild(heading);

  if (answerable.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No open requests right now.";
    page.appendChild(empty);
  }

  const list = document.createElement("ul");
  list.className = "request-list";
  for (const request of answerable) {
    const item = document.createElement("li");
    item.dataset.requestId = request.request_id;
    const text = document.createElement("span");
    text.textContent =
      `${describeConfig(request.config)} — ${request.reward} EP` +
      ` at ${request.allowed_cameras.join("/")} (from ${request.requester_id})`;
    const go = document.createElement("button");
    go.className = "perform-link";
    go.textContent = "Perform";
    go.addEventListener("click", () => {
      ctx.session.selectedRequest = request;
      ctx.navigate("perform");
    });
    item.appendChild(text);
    item.appendChild(go);
    list.appendChild(item);
  }
  page.appendChild(list);
  root.appendChild(page);
}
