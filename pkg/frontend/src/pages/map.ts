import type { PageContext } from "../context.js";
import type { MapCamera } from "../types.js";
import { describeConfig } from "../types.js";

// Static camera coordinates on a pannable surface; no tile service involved.

function project(cameras: MapCamera[], width: number, height: number) {
  const lats = cameras.map((c) => c.latitude);
  const lons = cameras.map((c) => c.longitude);
  const minLat = Math.min(...lats);
  const maxLat = Math.max(...lats);
  const minLon = Math.min(...lons);
  const maxLon = Math.max(...lons);
  const latSpan = maxLat - minLat || 1;
  const lonSpan = maxLon - minLon || 1;
  const margin = 60;
  return (camera: MapCamera) => ({
    x: margin + ((camera.longitude - minLon) / lonSpan) * (width - 2 * margin),
    y: margin + ((maxLat - camera.latitude) / latSpan) * (height - 2 * margin),
  });
}

export async function renderMapPage(root: HTMLElement, ctx: PageContext): Promise<void> {
  const view = await ctx.api.getMap();
  ctx.session.cachedMap = view;

  root.innerHTML = "";
  const container = document.createElement("div");
  container.className = "map-page";

  const surface = document.createElement("div");
  surface.className = "map-surface";
  surface.style.position = "relative";
  surface.style.overflow = "hidden";
  surface.style.width = "640px";
  surface.style.height = "420px";
  surface.style.border = "1px solid #888";

  const world = document.createElement("div");
  world.className = "map-world";
  world.style.position = "absolute";
  let panX = 0;
  let panY = 0;
  const applyPan = () => {
    world.style.transform = `translate(${panX}px, ${panY}px)`;
  };
  applyPan();

  // drag to pan
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  surface.addEventListener("pointerdown", (event) => {
    dragging = true;
    lastX = event.clientX;
    lastY = event.clientY;
  });
  surface.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    panX += event.clientX - lastX;
    panY += event.clientY - lastY;
    lastX = event.clientX;
    lastY = event.clientY;
    applyPan();
  });
  surface.addEventListener("pointerup", () => {
    dragging = false;
  });

  const detail = document.createElement("div");
  detail.className = "map-detail";
  detail.textContent = "Select a camera pin to see its requests.";

  const position = project(view.cameras, 640, 420);
  for (const camera of view.cameras) {
    const { x, y } = position(camera);
    const pin = document.createElement("button");
    pin.className = "map-pin";
    pin.dataset.cameraId = camera.camera_id;
    pin.style.position = "absolute";
    pin.style.left = `${x}px`;
    pin.style.top = `${y}px`;
    pin.textContent = `${camera.camera_id}${camera.indoor ? " (indoor)" : ""}`;

    const badge = document.createElement("span");
    badge.className = "badge";
    badge.textContent = String(camera.open_request_count);
    pin.appendChild(badge);

    pin.addEventListener("click", () => {
      detail.innerHTML = "";
      const title = document.createElement("h3");
      title.textContent = `${camera.camera_id}: ${camera.open_request_count} open request(s)`;
      detail.appendChild(title);
      const list = document.createElement("ul");
      list.className = "pin-requests";
      for (const request of camera.requests) {
        const item = document.createElement("li");
        item.dataset.requestId = request.request_id;
        item.textContent =
          `${describeConfig(request.config)} — ${request.reward} EP from ${request.requester_id}`;
        list.appendChild(item);
      }
      detail.appendChild(list);
    });
    world.appendChild(pin);
  }

  surface.appendChild(world);
  container.appendChild(surface);
  container.appendChild(detail);
  root.appendChild(container);
}
