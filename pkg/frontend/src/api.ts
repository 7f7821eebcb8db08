/** Typed client for the session service; every mutation is a single POST. */

export type Player = "E" | "A";

export interface ChoiceMenu {
  kind: "choice";
  options: string[];
}

export interface OrdinalMenu {
  kind: "ordinal";
  below: string;
  finiteOnly: boolean;
  choices?: string[];
}

export interface ProfileMenu {
  kind: "profile";
  agents: Record<string, string[] | "naturals">;
}

export type Menu = ChoiceMenu | OrdinalMenu | ProfileMenu;

export interface LegalMoves {
  phase: string;
  actor: Player;
  menu: Menu;
}

export type Move = string | Record<string, string>;

export interface EmbeddedInfo {
  formula: string;
  verifier: Player;
  controller: Player;
  coalition: number[];
}

export interface View {
  id: string;
  version: number;
  phase: string;
  state: string;
  limit: string | null;
  announced: string | null;
  gammaBound: string | null;
  modelKind: "finite" | "lazy";
  rootFormula: string;
  activeFormula: string | null;
  verifier: Player;
  pendingActor: Player | null;
  machinePending: boolean;
  legalMoves: LegalMoves | null;
  winner: Player | null;
  reason: string | null;
  roles: Record<Player, string>;
  states?: string[];
  embedded: EmbeddedInfo | null;
  transcriptLength: number;
}

export interface TranscriptRecord {
  phase: string;
  actor: Player | null;
  move: unknown;
  state: string;
  limit: string | null;
  context: string | null;
}

export interface Transcript {
  moves: TranscriptRecord[];
  winner: Player | null;
  reason: string | null;
}

export interface LabelOverlay {
  contextFormula: string;
  gamma: string;
  controller: Player;
  perPlayer: Record<Player, Record<string, string>>;
}

export interface SessionSetup {
  model?: unknown;
  lazyModel?: string;
  state: string;
  formula: string;
  mode: { kind: string; gammaBound?: string };
  roles: Record<Player, "human" | "machine">;
  scripts?: Partial<Record<Player, { name: string; n?: number }>>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(body)}`);
  }
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body;
  }

  async createSession(setup: SessionSetup): Promise<{ id: string; view: View }> {
    return (await this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(setup),
    })) as { id: string; view: View };
  }

  async getView(id: string): Promise<View> {
    return (await this.request(`/sessions/${id}`)) as View;
  }

  async postMove(id: string, actor: Player, move: Move, version: number): Promise<View> {
    return (await this.request(`/sessions/${id}/moves?autoReply=true`, {
      method: "POST",
      body: JSON.stringify({ actor, move, version }),
    })) as View;
  }

  async getTranscript(id: string): Promise<Transcript> {
    return (await this.request(`/sessions/${id}/transcript`)) as Transcript;
  }

  async getLabels(id: string): Promise<LabelOverlay> {
    return (await this.request(`/sessions/${id}/labels`)) as LabelOverlay;
  }
}
