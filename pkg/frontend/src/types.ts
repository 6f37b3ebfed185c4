// Payload shapes exactly as the server sends them. The client never derives
// balances, verdicts, or ranks on its own; it renders these values verbatim.

export interface PlayerPayload {
  player_id: string;
  display_name: string;
  ep_balance: number;
  medal_count: number;
  friend_ids: string[];
  joined_at: number;
}

export interface RequestConfigPayload {
  action_index: number;
  attribute_set: number[];
}

export interface RequestSummary {
  request_id: string;
  requester_id: string;
  config: RequestConfigPayload;
  reward: number;
  state: "OPEN" | "FULFILLED" | "REVIEWED" | "CANCELLED";
  created_at: number;
  allowed_cameras: string[];
  fulfilled_by: string | null;
}

export interface CameraPayload {
  camera_id: string;
  latitude: number;
  longitude: number;
  indoor: boolean;
  detection_zone?: [number, number][];
  frame_width?: number;
  frame_height?: number;
}

export interface MapCamera extends CameraPayload {
  open_request_count: number;
  requests: RequestSummary[];
}

export interface MapView {
  cameras: MapCamera[];
}

export interface PerformancePayload {
  performance_id: string;
  request_id: string;
  performer_id: string;
  camera_id: string;
  started_at: number;
  action_probs: number[];
  attribute_probs: number[];
  score: number;
  verdict: "PASS" | "FAIL";
  review: unknown | null;
}

export interface PerformanceDetail extends PerformancePayload {
  action_term: number;
  attribute_term: number;
}

export interface PerformResponse {
  performance: PerformancePayload;
  action_term: number;
  attribute_term: number;
  live_token: string;
  ep_balance: number;
}

export interface LeaderboardEntry {
  player_id: string;
  display_name: string;
  medal_count: number;
  ep_balance: number;
  rank: number;
}

export type LiveState = "DETECTING" | "DETECTED" | "EVALUATING" | "RESULT" | "FAILED";

export interface LiveMessage {
  state: LiveState;
  [key: string]: unknown;
}

// Deployment vocabulary: fixed per deployment, mirrored here so the composer
// can label pickers and honor exclusive groups without extra server surface.
export const ACTIONS = [
  "love-sign",
  "bowing-down",
  "thanksgiving",
  "hand-waving",
  "hugging",
] as const;

export const ATTRIBUTES = [
  "male",
  "female",
  "upper-black",
  "upper-white",
  "upper-red",
  "upper-blue",
  "tshirt",
  "jacket",
  "dress",
  "backpack",
  "hat",
  "glasses",
] as const;

export const EXCLUSIVE_GROUPS: number[][] = [
  [0, 1], // gender
  [2, 3, 4, 5], // upper-body color
  [6, 7, 8], // clothing type
];

export function exclusiveGroupOf(attributeIndex: number): number[] | null {
  for (const group of EXCLUSIVE_GROUPS) {
    if (group.includes(attributeIndex)) return group;
  }
  return null;
}

export function describeConfig(config: RequestConfigPayload): string {
  const attrs = config.attribute_set.map((j) => ATTRIBUTES[j] ?? `attr-${j}`).join(", ");
  return `${ACTIONS[config.action_index] ?? `action-${config.action_index}`} [${attrs}]`;
}
