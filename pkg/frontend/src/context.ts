import type { ApiClient } from "./api.js";
import type { PageName, SessionState } from "./state.js";

export interface PageContext {
  api: ApiClient;
  session: SessionState;
  navigate: (page: PageName) => void;
}
