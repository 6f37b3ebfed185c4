import type { PageContext } from "../context.js";
import { ACTIONS, ATTRIBUTES, exclusiveGroupOf } from "../types.js";
import { ApiError } from "../api.js";

/**
 * Request composer: one action, attribute chips honoring exclusive groups
 * (picking a second member of a group replaces the first), a reward slider
 * bounded by the server-reported balance, and a camera multi-select.
 */
export async function renderComposePage(root: HTMLElement, ctx: PageContext): Promise<void> {
  const player = await ctx.api.getPlayer(ctx.session.playerId!);
  ctx.session.player = player;
  const cameras = await ctx.api.getCameras();

  root.innerHTML = "";
  const form = document.createElement("div");
  form.className = "compose-page";

  const balanceLine = document.createElement("p");
  balanceLine.className = "balance";
  balanceLine.textContent = `Balance: ${player.ep_balance} EP`;
  form.appendChild(balanceLine);

  // action picker
  const actionBox = document.createElement("fieldset");
  actionBox.className = "action-picker";
  let selectedAction = 0;
  ACTIONS.forEach((label, index) => {
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = "action";
    radio.value = String(index);
    radio.id = `action-${index}`;
    if (index === 0) radio.checked = true;
    radio.addEventListener("change", () => {
      selectedAction = index;
    });
    const tag = document.createElement("label");
    tag.htmlFor = radio.id;
    tag.textContent = label;
    actionBox.appendChild(radio);
    actionBox.appendChild(tag);
  });
  form.appendChild(actionBox);

  // attribute chips with exclusive-group replacement
  const selectedAttributes = new Set<number>();
  const chips: HTMLButtonElement[] = [];
  const attributeBox = document.createElement("div");
  attributeBox.className = "attribute-picker";
  const refreshChips = () => {
    chips.forEach((chip, index) => {
      chip.classList.toggle("selected", selectedAttributes.has(index));
      chip.setAttribute("aria-pressed", selectedAttributes.has(index) ? "true" : "false");
    });
  };
  ATTRIBUTES.forEach((label, index) => {
    const chip = document.createElement("button");
    chip.className = "attribute-chip";
    chip.dataset.attributeIndex = String(index);
    chip.textContent = label;
    chip.addEventListener("click", () => {
      if (selectedAttributes.has(index)) {
        selectedAttributes.delete(index);
      } else {
        const group = exclusiveGroupOf(index);
        if (group) {
          for (const member of group) selectedAttributes.delete(member);
        }
        selectedAttributes.add(index);
      }
      refreshChips();
      refreshSubmit();
    });
    chips.push(chip);
    attributeBox.appendChild(chip);
  });
  form.appendChild(attributeBox);

  // reward slider bounded by balance
  const reward = document.createElement("input");
  reward.type = "range";
  reward.className = "reward-slider";
  reward.min = "1";
  reward.max = String(Math.max(1, player.ep_balance));
  reward.value = String(Math.min(10, Math.max(1, player.ep_balance)));
  const rewardLabel = document.createElement("span");
  rewardLabel.className = "reward-value";
  const refreshReward = () => {
    rewardLabel.textContent = `${reward.value} EP`;
  };
  reward.addEventListener("input", () => {
    refreshReward();
    refreshSubmit();
  });
  refreshReward();
  form.appendChild(reward);
  form.appendChild(rewardLabel);

  // camera multi-select
  const selectedCameras = new Set<string>();
  const cameraBox = document.createElement("div");
  cameraBox.className = "camera-picker";
  for (const camera of cameras) {
    const check = document.createElement("input");
    check.type = "checkbox";
    check.id = `camera-${camera.camera_id}`;
    check.value = camera.camera_id;
    check.addEventListener("change", () => {
      if (check.checked) selectedCameras.add(camera.camera_id);
      else selectedCameras.delete(camera.camera_id);
      refreshSubmit();
    });
    const tag = document.createElement("label");
    tag.htmlFor = check.id;
    tag.textContent = camera.camera_id;
    cameraBox.appendChild(check);
    cameraBox.appendChild(tag);
  }
  form.appendChild(cameraBox);

  const submit = document.createElement("button");
  submit.className = "publish-button";
  submit.textContent = "Publish request";
  const status = document.createElement("p");
  status.className = "compose-status";

  const refreshSubmit = () => {
    const rewardValue = Number(reward.value);
    submit.disabled =
      selectedAttributes.size === 0 ||
      selectedCameras.size === 0 ||
      rewardValue < 1 ||
      rewardValue > player.ep_balance;
  };
  refreshSubmit();

  submit.addEventListener("click", async () => {
    try {
      await ctx.api.publishRequest({
        action_index: selectedAction,
        attribute_set: [...selectedAttributes].sort((a, b) => a - b),
        reward: Number(reward.value),
        cameras: [...selectedCameras].sort(),
      });
      // balance is server-owned: re-fetch rather than subtracting locally
      const updated = await ctx.api.getPlayer(player.player_id);
      ctx.session.player = updated;
      balanceLine.textContent = `Balance: ${updated.ep_balance} EP`;
      status.textContent = "Request published.";
    } catch (error) {
      status.textContent =
        error instanceof ApiError ? `Publish failed (${error.code}): ${error.detail}` : String(error);
    }
  });
  form.appendChild(submit);
  form.appendChild(status);
  root.appendChild(form);
}
