/**
 * Console state as a pure function of the event prefix.
 *
 * `reduce` folds one session event into a new ViewState; replaying a
 * recorded stream therefore reproduces exactly the state a from-start
 * observer would hold.  Transcript lines mirror the engine's own full
 * verbosity rendering so a replayed log reads like the live session.
 */

import { SessionEvent } from "./protocol.js";

export type Connection = "idle" | "connecting" | "live" | "closed" | "error";

export interface WmRow {
  id: number;
  concept: string;
  context: string;
  activation: number;
  pinned: boolean;
}

export interface GoalRow {
  id: number;
  kind: string;
  objective: string;
  importance: number;
  context: string;
  status: string;
  imagined: boolean;
}

export interface EmotionRow {
  id: number;
  kind: string;
  intensity: number;
  target: string | null;
  imagined: boolean;
}

export interface ViewState {
  connection: Connection;
  detail: string;
  mode: string | null;
  cycle: number;
  lastSeq: number;
  transcript: string[];
  wm: WmRow[];
  goals: GoalRow[];
  emotions: EmotionRow[];
  problems: string[];
}

export function initialView(): ViewState {
  return {
    connection: "idle",
    detail: "",
    mode: null,
    cycle: 0,
    lastSeq: 0,
    transcript: [],
    wm: [],
    goals: [],
    emotions: [],
    problems: [],
  };
}

export function withConnection(
  state: ViewState,
  connection: Connection,
  detail = "",
): ViewState {
  return { ...state, connection, detail };
}

export function withProblem(state: ViewState, problem: string): ViewState {
  return { ...state, problems: [...state.problems, problem] };
}

const BANNER_BAR = "-".repeat(60);

/**
 * Importance and intensity are floats on the engine side, where an
 * integral value still prints with a trailing ".0".  JSON erases the
 * distinction, so restore it here.
 */
function pyFloat(value: number): string {
  return Number.isInteger(value) ? value.toFixed(1) : String(value);
}

/** Transcript lines for one event, matching the engine's full rendering. */
export function renderEventLines(event: SessionEvent): string[] {
  const data = event.data as Record<string, any>;
  switch (event.kind) {
    case "PROMPT":
      return ["> " + data.text];
    case "MODE":
      return [String(data.mode).toUpperCase() + " MODE"];
    case "ERROR":
      return ["ERROR: " + data.message];
    case "TEXT":
      if (data.tag === "banner") {
        return [BANNER_BAR, ...String(data.text).split("\n"), BANNER_BAR];
      }
      if (data.tag === "warn") {
        return ["WARNING: " + data.text];
      }
      return [data.text];
    case "WM-ADD":
      return [(data.refreshed ? "REFRESH IN WM " : "ADD TO WM ") + data.tag];
    case "WM-REMOVE":
      return ["REMOVE FROM WM " + data.tag];
    case "RULE-FIRED":
      return [`RULE ${String(data.name).toUpperCase()} FIRES`];
    case "GOAL":
      if (data.op === "activate") {
        return [
          `GOAL ACTIVATED ${data.tag} KIND ${data.kind}` +
            ` IMPORTANCE ${pyFloat(data.importance)}`,
        ];
      }
      return [`GOAL ${data.status} ${data.tag}${data.imagined ? " (IMAGINED)" : ""}`];
    case "EMOTION": {
      let base = `${data.kind} ${pyFloat(data.intensity)}`;
      if (data.target) {
        base += ` TOWARD ${String(data.target).toUpperCase()}`;
      }
      if (data.imagined) {
        base += " (IMAGINED)";
      }
      if (data.op === "activate") return [`EMOTION ${base}`];
      if (data.op === "scale") return [`EMOTION SCALED ${base}`];
      if (data.op === "renew") return [`EMOTION RENEWED ${base}`];
      return [];
    }
    case "CONTROL-GOAL":
      if (data.op === "activate") {
        return [
          `CONTROL GOAL ${data.kind} ACTIVATED` +
            ` (IMPORTANCE ${pyFloat(data.importance)})`,
        ];
      }
      if (data.op === "conclude") {
        return [`CONTROL GOAL ${data.kind} ${data.status}`];
      }
      return [];
    case "SCENARIO-EVENT":
      switch (data.step) {
        case "goal":
          return [`SUBGOAL ${data.tag}`];
        case "action":
          return [`ACTION ${data.tag}`];
        case "effect":
          return [`EFFECT ${data.tag}`];
        case "belief":
          return [`BELIEF ${data.tag}`];
        default:
          return []; // assumptions already produce their ASSUME trace line
      }
    default:
      return [];
  }
}

function foldWm(rows: WmRow[], event: SessionEvent): WmRow[] {
  const data = event.data as Record<string, any>;
  if (event.kind === "WM-ADD") {
    if (data.context !== "real") {
      return rows; // imagined scratch contexts churn too fast to show
    }
    const row: WmRow = {
      id: data.id,
      concept: data.concept,
      context: data.context,
      activation: data.activation,
      pinned: Boolean(data.pinned),
    };
    const next = rows.filter((r) => r.id !== row.id);
    next.push(row);
    next.sort((a, b) => a.id - b.id);
    return next;
  }
  if (event.kind === "WM-REMOVE") {
    return rows.filter((r) => r.id !== data.id);
  }
  return rows;
}

function foldGoals(rows: GoalRow[], event: SessionEvent): GoalRow[] {
  if (event.kind !== "GOAL") {
    return rows;
  }
  const data = event.data as Record<string, any>;
  if (data.op === "activate") {
    const row: GoalRow = {
      id: data.id,
      kind: data.kind,
      objective: data.objective,
      importance: data.importance,
      context: data.context,
      status: "ACTIVE",
      imagined: false,
    };
    return [...rows.filter((r) => r.id !== row.id), row];
  }
  if (data.op === "outcome") {
    return rows.map((r) =>
      r.id === data.id
        ? { ...r, status: data.status, imagined: Boolean(data.imagined) }
        : r,
    );
  }
  return rows;
}

function foldEmotions(rows: EmotionRow[], event: SessionEvent): EmotionRow[] {
  if (event.kind !== "EMOTION") {
    return rows;
  }
  const data = event.data as Record<string, any>;
  const row: EmotionRow = {
    id: data.id,
    kind: data.kind,
    intensity: data.intensity,
    target: data.target ?? null,
    imagined: Boolean(data.imagined),
  };
  const existing = rows.findIndex((r) => r.id === row.id);
  if (existing === -1) {
    return [...rows, row];
  }
  return rows.map((r, i) => (i === existing ? row : r));
}

/**
 * Fold one event into the view.  Events at or before `lastSeq` have
 * already been seen (a resumed stream may overlap) and change nothing.
 */
export function reduce(state: ViewState, event: SessionEvent): ViewState {
  if (event.seq <= state.lastSeq) {
    return state;
  }
  const next: ViewState = {
    ...state,
    lastSeq: event.seq,
    cycle: event.cycle,
    transcript: [...state.transcript, ...renderEventLines(event)],
    wm: foldWm(state.wm, event),
    goals: foldGoals(state.goals, event),
    emotions: foldEmotions(state.emotions, event),
  };
  if (event.kind === "MODE") {
    next.mode = String((event.data as Record<string, any>).mode);
  }
  if (event.kind === "ERROR") {
    next.problems = [
      ...state.problems,
      String((event.data as Record<string, any>).message),
    ];
  }
  return next;
}

export function reduceAll(state: ViewState, events: SessionEvent[]): ViewState {
  return events.reduce(reduce, state);
}

// -- pane text ------------------------------------------------------------

export function activationBar(activation: number, width = 10): string {
  const clamped = Math.max(0, Math.min(1, activation));
  const filled = Math.round(clamped * width);
  return "#".repeat(filled) + "-".repeat(width - filled);
}

export function wmPaneLines(state: ViewState): string[] {
  return state.wm.map(
    (r) =>
      `W.${r.id} [${activationBar(r.activation)}] ${r.concept}` +
      (r.pinned ? " (pinned)" : ""),
  );
}

export function goalPaneLines(state: ViewState): string[] {
  return state.goals.map(
    (r) =>
      `G.${r.id} ${r.status} ${r.objective} (${r.kind}, importance ${r.importance})` +
      (r.imagined ? " (imagined)" : ""),
  );
}

export function emotionPaneLines(state: ViewState): string[] {
  return state.emotions.map((r) => {
    let line = `E.${r.id} ${r.kind} [${activationBar(r.intensity)}] ${r.intensity}`;
    if (r.target) {
      line += ` toward ${r.target}`;
    }
    if (r.imagined) {
      line += " (imagined)";
    }
    return line;
  });
}

export function statusLine(state: ViewState): string {
  const mode = state.mode ? state.mode.toUpperCase() : "NO MODE YET";
  const where = state.detail ? ` ${state.detail}` : "";
  return `${mode} | cycle ${state.cycle} | ${state.connection}${where}`;
}
