import type { PageContext } from "../context.js";

/** Ranked table straight from the server; the caller's own row is highlighted. */
export async function renderLeaderboardPage(root: HTMLElement, ctx: PageContext): Promise<void> {
  const entries = await ctx.api.getLeaderboard();

  root.innerHTML = "";
  const page = document.createElement("div");
  page.className = "leaderboard-page";
  const table = document.createElement("table");
  table.className = "leaderboard";
  const head = document.createElement("tr");
  for (const column of ["#", "player", "medals", "EP"]) {
    const cell = document.createElement("th");
    cell.textContent = column;
    head.appendChild(cell);
  }
  table.appendChild(head);

  for (const entry of entries) {
    const row = document.createElement("tr");
    row.dataset.playerId = entry.player_id;
    if (entry.player_id === ctx.session.playerId) {
      row.classList.add("own-row");
    }
    for (const value of [entry.rank, entry.display_name, entry.medal_count, entry.ep_balance]) {
      const cell = document.createElement("td");
      cell.textContent = String(value);
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  page.appendChild(table);
  root.appendChild(page);
}
