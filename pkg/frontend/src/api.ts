import type {
  LeaderboardEntry,
  LiveMessage,
  MapView,
  CameraPayload,
  PerformanceDetail,
  PerformResponse,
  PlayerPayload,
  RequestSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export interface LiveHandle {
  close(): void;
}

// Minimal shape of EventSource we rely on, injectable for tests.
export interface EventSourceLike {
  onmessage: ((event: { data: string }) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

function defaultEventSourceFactory(url: string): EventSourceLike {
  return new EventSource(url) as unknown as EventSourceLike;
}

export class ApiClient {
  playerId: string | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchFn = (url, init) => fetch(url, init),
    private eventSourceFactory: EventSourceFactory = defaultEventSourceFactory,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.playerId) headers["X-Player-Id"] = this.playerId;
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "error";
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { error?: string; detail?: string };
        code = parsed.error ?? code;
        detail = parsed.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }

  async register(displayName: string): Promise<PlayerPayload> {
    const player = await this.call<PlayerPayload>("POST", "/players", {
      display_name: displayName,
    });
    this.playerId = player.player_id;
    await this.call("POST", `/players/${player.player_id}/allocation`);
    return this.getPlayer(player.player_id);
  }

  getPlayer(playerId: string): Promise<PlayerPayload> {
    return this.call("GET", `/players/${playerId}`);
  }

  getMap(): Promise<MapView> {
    return this.call("GET", "/map");
  }

  getCameras(): Promise<CameraPayload[]> {
    return this.call("GET", "/cameras");
  }

  async listRequests(stateFilter?: string): Promise<RequestSummary[]> {
    const query = stateFilter ? `?state_filter=${stateFilter}` : "";
    const body = await this.call<{ requests: RequestSummary[] }>("GET", `/requests${query}`);
    return body.requests;
  }

  publishRequest(body: {
    action_index: number;
    attribute_set: number[];
    reward: number;
    cameras: string[];
  }): Promise<RequestSummary> {
    return this.call("POST", "/requests", body);
  }

  perform(body: {
    request_id: string;
    camera_id: string;
    gps_latitude: number;
    gps_longitude: number;
    enacted?: { action_index: number; attributes: boolean[] };
  }): Promise<PerformResponse> {
    return this.call("POST", "/performances", body);
  }

  getPerformance(performanceId: string): Promise<PerformanceDetail> {
    return this.call("GET", `/performances/${performanceId}`);
  }

  submitReview(body: {
    performance_id: string;
    overall_score: number;
    attribute_confirmed: boolean;
    action_confirmed: boolean;
  }): Promise<{ medal_count: number }> {
    return this.call("POST", "/reviews", body);
  }

  async getLeaderboard(): Promise<LeaderboardEntry[]> {
    const body = await this.call<{ entries: LeaderboardEntry[] }>("GET", "/leaderboard");
    return body.entries;
  }

  /**
   * Subscribe to the live status stream for one attempt. Messages arrive in
   * server order. If the push channel drops before RESULT, degrade to polling
   * the performance detail endpoint and synthesize the final message from it.
   */
  watchLive(
    token: string,
    performanceId: string,
    onMessage: (message: LiveMessage) => void,
    onDone: () => void,
    pollIntervalMs = 400,
  ): LiveHandle {
    let finished = false;
    let source: EventSourceLike | null = null;

    const finish = () => {
      if (finished) return;
      finished = true;
      if (source) source.close();
      onDone();
    };

    const pollFallback = async () => {
      for (let attempt = 0; attempt < 25 && !finished; attempt++) {
        try {
          const detail = await this.getPerformance(performanceId);
          onMessage({
            state: "RESULT",
            performance_id: detail.performance_id,
            score: detail.score,
            verdict: detail.verdict,
          });
          finish();
          return;
        } catch {
          await new Promise((resolve) => setTimeout(resolve, pollIntervalMs));
        }
      }
      finish();
    };

    try {
      source = this.eventSourceFactory(`${this.baseUrl}/live/${token}`);
    } catch {
      void pollFallback();
      return { close: finish };
    }
    let sawResult = false;
    source.onmessage = (event) => {
      const message = JSON.parse(event.data) as LiveMessage;
      onMessage(message);
      if (message.state === "RESULT" || message.state === "FAILED") {
        sawResult = true;
        finish();
      }
    };
    source.onerror = () => {
      if (!sawResult && !finished) {
        if (source) source.close();
        void pollFallback();
      } else {
        finish();
      }
    };
    return { close: finish };
  }
}
