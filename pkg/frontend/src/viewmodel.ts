/** Pure view-model derivation: everything rendered comes from server views,
 * so a button exists exactly when the legal-move menu contains its move. */

import type {
  LabelOverlay,
  LegalMoves,
  Menu,
  Move,
  TranscriptRecord,
  View,
} from "./api.js";

export interface MoveButton {
  label: string;
  move: Move;
}

export interface OrdinalEntry {
  kind: "ordinal-entry";
  below: string;
  finiteOnly: boolean;
  quick: MoveButton[];
}

export interface ProfileEntry {
  kind: "profile-entry";
  agents: { agent: string; options: string[] | "naturals" }[];
}

export type MovePanel =
  | { kind: "buttons"; buttons: MoveButton[] }
  | OrdinalEntry
  | ProfileEntry
  | null;

const CHOICE_LABELS: Record<string, string> = {
  left: "left disjunct",
  right: "right disjunct",
  end: "end the game here",
  continue: "keep playing",
};

export function movePanel(legal: LegalMoves | null): MovePanel {
  if (!legal) {
    return null;
  }
  const menu: Menu = legal.menu;
  if (menu.kind === "choice") {
    return {
      kind: "buttons",
      buttons: menu.options.map((option) => ({
        label: CHOICE_LABELS[option] ?? option,
        move: option,
      })),
    };
  }
  if (menu.kind === "ordinal") {
    const quick = (menu.choices ?? []).map((choice) => ({
      label: choice,
      move: choice,
    }));
    return {
      kind: "ordinal-entry",
      below: menu.below,
      finiteOnly: menu.finiteOnly,
      quick,
    };
  }
  return {
    kind: "profile-entry",
    agents: Object.entries(menu.agents).map(([agent, options]) => ({
      agent,
      options,
    })),
  };
}

/** Client-side sanity check mirroring the server's ordinal grammar (terms in
 * strictly decreasing exponent order); the server stays authoritative. */
export function ordinalTextOk(text: string, finiteOnly: boolean): boolean {
  const trimmed = text.trim();
  if (trimmed === "") {
    return false;
  }
  if (finiteOnly) {
    return /^\d+$/.test(trimmed);
  }
  let lastExponent = Infinity;
  for (const part of trimmed.split("+")) {
    const match = /^(?:(\d+)|w(?:\^(\d+))?(?:\*(\d+))?)$/.exec(part);
    if (!match) {
      return false;
    }
    const exponent = match[1] !== undefined ? 0 : match[2] !== undefined ? Number(match[2]) : 1;
    if (exponent >= lastExponent) {
      return false;
    }
    lastExponent = exponent;
  }
  return true;
}

export function profileMove(selection: Record<string, string>): Move {
  return { ...selection };
}

export function describeOutcome(view: View): string | null {
  if (view.winner === null) {
    return null;
  }
  const name = view.winner === "E" ? "Eloise" : "Abelard";
  return `${name} wins (${view.reason})`;
}

export function statusLine(view: View): string {
  if (view.winner !== null) {
    return describeOutcome(view) ?? "";
  }
  const pieces = [`phase: ${view.phase}`, `state: ${view.state}`];
  if (view.limit !== null) {
    pieces.push(`time limit: ${view.limit}`);
  }
  if (view.pendingActor) {
    const side = view.pendingActor === "E" ? "Eloise" : "Abelard";
    const kind = view.machinePending ? "machine" : "you";
    pieces.push(`to move: ${side} (${kind})`);
  }
  return pieces.join("  |  ");
}

export function transcriptLines(records: TranscriptRecord[]): string[] {
  return records.map((record) => {
    const actor = record.actor ?? "auto";
    const move =
      record.move === null || record.move === undefined
        ? ""
        : ` ${JSON.stringify(record.move)}`;
    const limit = record.limit !== null ? ` [${record.limit}]` : "";
    return `${record.phase}${move} — ${actor} @ ${record.state}${limit}`;
  });
}

export interface LabelRow {
  state: string;
  eloise: string;
  abelard: string;
}

export function labelRows(overlay: LabelOverlay, states: string[]): LabelRow[] {
  return states.map((state) => ({
    state,
    eloise: overlay.perPlayer.E?.[state] ?? "?",
    abelard: overlay.perPlayer.A?.[state] ?? "?",
  }));
}

/** Color scale for the overlay: numeric labels shade with distance, win and
 * lose get fixed colors. */
export function labelColor(label: string): string {
  if (label === "win") {
    return "#2e7d32";
  }
  if (label === "lose") {
    return "#c62828";
  }
  const value = Number(label.replace("w", "90"));
  const clamped = Math.min(Number.isFinite(value) ? value : 9, 9);
  const hue = 120 - clamped * 12;
  return `hsl(${hue}, 70%, 42%)`;
}

export interface GraphNode {
  id: string;
  x: number;
  y: number;
  current: boolean;
  frontier: boolean;
}

export interface GraphEdge {
  from: string;
  to: string;
  label: string;
}

export interface GraphData {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

interface FiniteModelJson {
  states: string[];
  transitions: Record<string, Record<string, string>>;
}

/** Circle layout for finite models with edges folded per target state. */
export function finiteGraph(model: FiniteModelJson, current: string): GraphData {
  const n = model.states.length;
  const radius = Math.max(90, 26 * n);
  const nodes = model.states.map((id, i) => {
    const angle = (2 * Math.PI * i) / n - Math.PI / 2;
    return {
      id,
      x: 160 + radius * Math.cos(angle) * 0.8,
      y: 140 + radius * Math.sin(angle) * 0.7,
      current: id === current,
      frontier: false,
    };
  });
  const edges: GraphEdge[] = [];
  for (const [from, table] of Object.entries(model.transitions)) {
    const byTarget = new Map<string, string[]>();
    for (const [profile, to] of Object.entries(table)) {
      const list = byTarget.get(to) ?? [];
      list.push(profile);
      byTarget.set(to, list);
    }
    for (const [to, profiles] of byTarget) {
      edges.push({ from, to, label: profiles.join(" ") });
    }
  }
  return { nodes, edges };
}

/** Lazily rendered infinite grid: visited states plus one frontier ring of
 * unexplored successors. */
export function lazyGraph(visited: string[], current: string): GraphData {
  const seen = new Set(visited);
  const nodes: GraphNode[] = [];
  const edges: GraphEdge[] = [];
  const place = (id: string): { x: number; y: number } => {
    if (id === "q0") {
      return { x: 60, y: 140 };
    }
    const [i, j] = id.split(",").map(Number);
    return { x: 140 + j * 70, y: 60 + i * 55 };
  };
  const frontier = new Set<string>();
  for (const id of visited) {
    const successor = id === "q0" ? null : nextState(id);
    if (successor && !seen.has(successor)) {
      frontier.add(successor);
    }
  }
  for (const id of [...visited, ...frontier]) {
    const { x, y } = place(id);
    nodes.push({ id, x, y, current: id === current, frontier: frontier.has(id) });
  }
  for (const id of visited) {
    if (id !== "q0") {
      const successor = nextState(id);
      if (seen.has(successor) || frontier.has(successor)) {
        edges.push({ from: id, to: successor, label: "0" });
      }
    }
  }
  return { nodes, edges };
}

function nextState(id: string): string {
  const [i, j] = id.split(",").map(Number);
  return `${i},${j + 1}`;
}

export function visitedStates(records: TranscriptRecord[]): string[] {
  const seen = new Set<string>();
  const ordered: string[] = [];
  for (const record of records) {
    if (!seen.has(record.state)) {
      seen.add(record.state);
      ordered.push(record.state);
    }
  }
  return ordered;
}
