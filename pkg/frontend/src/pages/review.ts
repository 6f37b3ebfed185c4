import type { PageContext } from "../context.js";
import { ApiError } from "../api.js";
import { describeConfig } from "../types.js";

/**
 * Review page: each fulfilled request of mine shows the received performance
 * with the recognizer's score decomposition, a 1-5 overall score picker,
 * and attribute/action confirmation toggles. Submitting grants the medal;
 * a second submit on the same performance is blocked.
 */
export async function renderReviewPage(root: HTMLElement, ctx: PageContext): Promise<void> {
  const fulfilled = (await ctx.api.listRequests("FULFILLED")).filter(
    (r) => r.requester_id === ctx.session.playerId && r.fulfilled_by,
  );

  root.innerHTML = "";
  const page = document.createElement("div");
  page.className = "review-page";
  const heading = document.createElement("h2");
  heading.textContent = "Performances awaiting your review";
  page.appendChild(heading);

  const medalLine = document.createElement("p");
  medalLine.className = "medal-count";
  medalLine.textContent = `Medals: ${ctx.session.player?.medal_count ?? 0}`;
  page.appendChild(medalLine);

  if (fulfilled.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "Nothing to review.";
    page.appendChild(empty);
  }

  for (const request of fulfilled) {
    const performance = await ctx.api.getPerformance(request.fulfilled_by!);
    const card = document.createElement("div");
    card.className = "review-card";
    card.dataset.performanceId = performance.performance_id;

    const summary = document.createElement("p");
    summary.textContent =
      `${describeConfig(request.config)} by ${performance.performer_id} — ` +
      `score ${performance.score.toFixed(4)} ` +
      `(action term ${performance.action_term.toFixed(4)}, ` +
      `attribute term ${performance.attribute_term.toFixed(4)})`;
    card.appendChild(summary);

    let overall = 5;
    const scoreBox = document.createElement("div");
    scoreBox.className = "score-picker";
    for (let value = 1; value <= 5; value++) {
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = `overall-${performance.performance_id}`;
      radio.value = String(value);
      radio.id = `overall-${performance.performance_id}-${value}`;
      if (value === 5) radio.checked = true;
      radio.addEventListener("change", () => {
        overall = value;
      });
      const tag = document.createElement("label");
      tag.htmlFor = radio.id;
      tag.textContent = String(value);
      scoreBox.appendChild(radio);
      scoreBox.appendChild(tag);
    }
    card.appendChild(scoreBox);

    const attrToggle = document.createElement("input");
    attrToggle.type = "checkbox";
    attrToggle.checked = true;
    attrToggle.className = "confirm-attributes";
    const attrLabel = document.createElement("label");
    attrLabel.textContent = "visual style matches";
    const actionToggle = document.createElement("input");
    actionToggle.type = "checkbox";
    actionToggle.checked = true;
    actionToggle.className = "confirm-action";
    const actionLabel = document.createElement("label");
    actionLabel.textContent = "body action matches";
    card.appendChild(attrToggle);
    card.appendChild(attrLabel);
    card.appendChild(actionToggle);
    card.appendChild(actionLabel);

    const submit = document.createElement("button");
    submit.className = "submit-review";
    submit.textContent = "Submit review";
    const status = document.createElement("span");
    status.className = "review-status";
    submit.addEventListener("click", async () => {
      submit.disabled = true; // double-submit is blocked
      try {
        const response = await ctx.api.submitReview({
          performance_id: performance.performance_id,
          overall_score: overall,
          attribute_confirmed: attrToggle.checked,
          action_confirmed: actionToggle.checked,
        });
        medalLine.textContent = `Medals: ${response.medal_count}`;
        if (ctx.session.player) ctx.session.player.medal_count = response.medal_count;
        status.textContent = "Reviewed. Medal granted.";
      } catch (error) {
        status.textContent =
          error instanceof ApiError ? `Review failed (${error.code})` : String(error);
        if (!(error instanceof ApiError && error.code === "wrong-state")) {
          submit.disabled = false;
        }
      }
    });
    card.appendChild(submit);
    card.appendChild(status);
    page.appendChild(card);
  }
  root.appendChild(page);
}
