import type { LiveHandle } from "./api.js";
import type { MapView, PlayerPayload, RequestSummary } from "./types.js";

export type PageName = "map" | "compose" | "select" | "perform" | "review" | "leaderboard";

/** Per-session client state. At most one live channel is active at a time. */
export class SessionState {
  player: PlayerPayload | null = null;
  currentPage: PageName = "map";
  cachedMap: MapView | null = null;
  selectedRequest: RequestSummary | null = null;
  private liveToken: string | null = null;
  private liveHandle: LiveHandle | null = null;

  get playerId(): string | null {
    return this.player ? this.player.player_id : null;
  }

  get activeLiveToken(): string | null {
    return this.liveToken;
  }

  /** Claim the single live-channel slot, closing any previous subscription. */
  attachLive(token: string, handle: LiveHandle): void {
    if (this.liveHandle) {
      this.liveHandle.close();
    }
    this.liveToken = token;
    this.liveHandle = handle;
  }

  releaseLive(token: string): void {
    if (this.liveToken === token) {
      this.liveToken = null;
      this.liveHandle = null;
    }
  }
}
