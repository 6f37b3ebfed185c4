import type { PageContext } from "../context.js";
import { ApiError } from "../api.js";
import { ATTRIBUTES, describeConfig } from "../types.js";

/**
 * Perform flow: pick a camera, press start, watch the live status stream.
 * Status messages render strictly in arrival order; a presence failure ends
 * the attempt with retry guidance; a PASS shows the EP actually earned.
 */
export async function renderPerformPage(root: HTMLElement, ctx: PageContext): Promise<void> {
  root.innerHTML = "";
  const request = ctx.session.selectedRequest;
  const page = document.createElement("div");
  page.className = "perform-page";
  if (!request) {
    const hint = document.createElement("p");
    hint.className = "empty";
    hint.textContent = "Choose a request first.";
    const back = document.createElement("button");
    back.textContent = "Browse requests";
    back.addEventListener("click", () => ctx.navigate("select"));
    page.appendChild(hint);
    page.appendChild(back);
    root.appendChild(page);
    return;
  }

  const cameras = await ctx.api.getCameras();
  const allowed = cameras.filter((c) => request.allowed_cameras.includes(c.camera_id));

  const title = document.createElement("h2");
  title.textContent = `Perform: ${describeConfig(request.config)} for ${request.reward} EP`;
  page.appendChild(title);

  const cameraSelect = document.createElement("select");
  cameraSelect.className = "camera-select";
  for (const camera of allowed) {
    const option = document.createElement("option");
    option.value = camera.camera_id;
    option.textContent = camera.camera_id;
    cameraSelect.appendChild(option);
  }
  page.appendChild(cameraSelect);

  // No real footage exists in the desk build: the performer declares what the
  // camera would see. Defaults assume they dress and act as requested.
  const enactedBox = document.createElement("details");
  enactedBox.className = "enacted-declaration";
  const summary = document.createElement("summary");
  summary.textContent = "What the camera will see";
  enactedBox.appendChild(summary);
  const appearance = ATTRIBUTES.map((_, index) =>
    request.config.attribute_set.includes(index),
  );
  ATTRIBUTES.forEach((label, index) => {
    const check = document.createElement("input");
    check.type = "checkbox";
    check.id = `enacted-${index}`;
    check.checked = appearance[index];
    check.addEventListener("change", () => {
      appearance[index] = check.checked;
    });
    const tag = document.createElement("label");
    tag.htmlFor = check.id;
    tag.textContent = label;
    enactedBox.appendChild(check);
    enactedBox.appendChild(tag);
  });
  page.appendChild(enactedBox);

  const statusList = document.createElement("ol");
  statusList.className = "live-status";
  const outcome = document.createElement("p");
  outcome.className = "outcome";

  const start = document.createElement("button");
  start.className = "start-button";
  start.textContent = "Start performance";
  start.addEventListener("click", async () => {
    start.disabled = true;
    statusList.innerHTML = "";
    outcome.textContent = "";
    const camera = allowed.find((c) => c.camera_id === cameraSelect.value) ?? allowed[0];
    try {
      const response = await ctx.api.perform({
        request_id: request.request_id,
        camera_id: camera.camera_id,
        // the device reports its GPS fix; here the fix is the camera position
        gps_latitude: camera.latitude,
        gps_longitude: camera.longitude,
        enacted: {
          action_index: request.config.action_index,
          attributes: [...appearance],
        },
      });
      const handle = ctx.api.watchLive(
        response.live_token,
        response.performance.performance_id,
        (message) => {
          const entry = document.createElement("li");
          entry.dataset.state = message.state;
          entry.textContent = message.state;
          statusList.appendChild(entry);
          if (message.state === "RESULT") {
            const verdict = String(message.verdict ?? response.performance.verdict);
            if (verdict === "PASS") {
              outcome.textContent =
                `PASS — earned ${request.reward} EP, balance now ${response.ep_balance} EP` +
                ` (score ${Number(message.score ?? response.performance.score).toFixed(4)})`;
            } else {
              outcome.textContent = "FAIL — the recognizer did not match the request.";
            }
          }
        },
        () => {
          ctx.session.releaseLive(response.live_token);
          start.disabled = false;
        },
      );
      ctx.session.attachLive(response.live_token, handle);
    } catch (error) {
      start.disabled = false;
      if (error instanceof ApiError && error.code === "presence-failed") {
        const entry = document.createElement("li");
        entry.dataset.state = "FAILED";
        entry.textContent = "FAILED";
        statusList.appendChild(entry);
        outcome.textContent =
          "Presence check failed: stand inside the camera's detection zone and retry.";
      } else if (error instanceof ApiError && error.code === "evaluation-unavailable") {
        outcome.textContent = "The evaluator is unavailable; the attempt was voided. Try again.";
      } else {
        outcome.textContent = error instanceof ApiError ? error.detail : String(error);
      }
    }
  });

  page.appendChild(start);
  page.appendChild(statusList);
  page.appendChild(outcome);
  root.appendChild(page);
}
