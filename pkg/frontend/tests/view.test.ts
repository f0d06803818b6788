import { readFileSync } from "node:fs";

import { describe, expect, it } from "vitest";

import { decodeServerLine, LineBuffer, SessionEvent } from "../src/protocol";
import {
  activationBar,
  emotionPaneLines,
  goalPaneLines,
  initialView,
  reduce,
  reduceAll,
  renderEventLines,
  statusLine,
  ViewState,
  withConnection,
  wmPaneLines,
} from "../src/view";

const FIXTURES = new URL("../../tests/fixtures/", import.meta.url);

function fixture(name: string): string {
  return readFileSync(new URL(name, FIXTURES), "utf8");
}

/** The recorded session, wrapped the way the server would stream it. */
function recordedStream(): string {
  return fixture("nuart_events.ndjson")
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => `{"event": ${line}}\n`)
    .join("");
}

function eventsOf(stream: string, chunkSizes: number[]): SessionEvent[] {
  const buffer = new LineBuffer();
  const events: SessionEvent[] = [];
  let at = 0;
  let pick = 0;
  while (at < stream.length) {
    const size = chunkSizes[pick % chunkSizes.length];
    pick += 1;
    for (const line of buffer.push(stream.slice(at, at + size))) {
      const message = decodeServerLine(line);
      if ("event" in message) {
        events.push(message.event);
      }
    }
    at += size;
  }
  expect(buffer.pending()).toBe("");
  return events;
}

function event(
  seq: number,
  kind: string,
  data: Record<string, unknown>,
  cycle = 1,
): SessionEvent {
  return { seq, cycle, kind, data };
}

describe("reduce", () => {
  it("ignores events at or before the last seen seq", () => {
    const first = reduce(initialView(), event(8, "PROMPT", { text: "hi" }));
    expect(reduce(first, event(8, "PROMPT", { text: "hi" }))).toBe(first);
    expect(reduce(first, event(3, "PROMPT", { text: "old" }))).toBe(first);
    expect(first.transcript).toEqual(["> hi"]);
  });

  it("tracks mode and cycle", () => {
    let state = reduce(initialView(), event(8, "MODE", { mode: "daydreaming" }, 0));
    expect(state.mode).toBe("daydreaming");
    expect(state.transcript).toEqual(["DAYDREAMING MODE"]);
    state = reduce(state, event(9, "TEXT", { tag: "trace", text: "CYCLE 1 BEGINS" }));
    expect(state.cycle).toBe(1);
  });

  it("keeps only real-context entries in the wm pane", () => {
    const add = (seq: number, id: number, context: string) =>
      event(seq, "WM-ADD", {
        id,
        concept: `(c ${id})`,
        context,
        activation: 0.5,
        pinned: false,
        refreshed: false,
        tag: `[^W.${id}]`,
      });
    let state = reduce(initialView(), add(10, 1, "real"));
    state = reduce(state, add(11, 2, "imagined-1"));
    state = reduce(state, add(12, 3, "real"));
    expect(state.wm.map((r) => r.id)).toEqual([1, 3]);
    state = reduce(
      state,
      event(13, "WM-REMOVE", { id: 1, concept: "(c 1)", context: "real", tag: "[^W.1]" }),
    );
    expect(state.wm.map((r) => r.id)).toEqual([3]);
  });

  it("refreshes update activation in place", () => {
    const base = {
      id: 4,
      concept: "(c 4)",
      context: "real",
      pinned: false,
      tag: "[^W.4]",
    };
    let state = reduce(
      initialView(),
      event(10, "WM-ADD", { ...base, activation: 1.0, refreshed: false }),
    );
    state = reduce(
      state,
      event(11, "WM-ADD", { ...base, activation: 0.7, refreshed: true }),
    );
    expect(state.wm).toHaveLength(1);
    expect(state.wm[0].activation).toBe(0.7);
  });

  it("moves goals from active to their outcome status", () => {
    let state = reduce(
      initialView(),
      event(10, "GOAL", {
        op: "activate",
        id: 1,
        kind: "DELTA",
        objective: "(ipt-lovers me debra)",
        importance: 0.6,
        context: "real",
        goal_class: "love",
        tag: "[^G.1]",
      }),
    );
    expect(state.goals).toEqual([
      {
        id: 1,
        kind: "DELTA",
        objective: "(ipt-lovers me debra)",
        importance: 0.6,
        context: "real",
        status: "ACTIVE",
        imagined: false,
      },
    ]);
    state = reduce(
      state,
      event(11, "GOAL", {
        op: "outcome",
        id: 1,
        outcome_id: 1,
        status: "FAILED",
        imagined: true,
        causer: "debra",
        objective: "(ipt-lovers me debra)",
        tag: "[^G.1]",
      }),
    );
    expect(state.goals[0].status).toBe("FAILED");
    expect(state.goals[0].imagined).toBe(true);
  });

  it("upserts emotions by id across activate, scale, and renew", () => {
    const emotion = (seq: number, op: string, intensity: number) =>
      event(seq, "EMOTION", {
        op,
        id: 1,
        kind: "NEG-AFFECT",
        intensity,
        target: null,
        imagined: false,
        source: 1,
      });
    let state = reduce(initialView(), emotion(10, "activate", 0.8));
    state = reduce(state, emotion(11, "scale", 0.4));
    expect(state.emotions).toEqual([
      { id: 1, kind: "NEG-AFFECT", intensity: 0.4, target: null, imagined: false },
    ]);
    state = reduce(state, emotion(12, "renew", 0.6));
    expect(state.emotions[0].intensity).toBe(0.6);
  });

  it("collects engine errors in problems and the transcript", () => {
    const state = reduce(
      initialView(),
      event(10, "ERROR", { message: "cannot understand input" }),
    );
    expect(state.problems).toEqual(["cannot understand input"]);
    expect(state.transcript).toEqual(["ERROR: cannot understand input"]);
  });
});

describe("renderEventLines", () => {
  it("frames banners between bars", () => {
    const lines = renderEventLines(
      event(10, "TEXT", { tag: "banner", text: "IF one thing\nTHEN another" }),
    );
    expect(lines).toEqual([
      "-".repeat(60),
      "IF one thing",
      "THEN another",
      "-".repeat(60),
    ]);
  });

  it("marks warnings and prompts", () => {
    expect(renderEventLines(event(10, "TEXT", { tag: "warn", text: "loop" }))).toEqual([
      "WARNING: loop",
    ]);
    expect(renderEventLines(event(10, "PROMPT", { text: "Debra said no." }))).toEqual([
      "> Debra said no.",
    ]);
  });

  it("prints integral importances and intensities as floats", () => {
    expect(
      renderEventLines(
        event(10, "EMOTION", {
          op: "activate",
          id: 1,
          kind: "JOY",
          intensity: 1,
          target: null,
          imagined: false,
        }),
      ),
    ).toEqual(["EMOTION JOY 1.0"]);
  });

  it("renders nothing for assumption steps", () => {
    expect(
      renderEventLines(
        event(10, "SCENARIO-EVENT", { step: "assumption", tag: "X", concept: "(x)" }),
      ),
    ).toEqual([]);
  });
});

describe("session replay", () => {
  const stream = recordedStream();
  const events = eventsOf(stream, [stream.length]);
  const replayed = reduceAll(initialView(), events);

  it("reproduces the engine's own transcript line for line", () => {
    expect(replayed.transcript.join("\n") + "\n").toBe(fixture("nuart_golden_trace.txt"));
  });

  it("is indifferent to how the stream was chunked", () => {
    for (const sizes of [[1], [3, 7, 31, 97], [1024]]) {
      const chunked = reduceAll(initialView(), eventsOf(stream, sizes));
      expect(chunked).toEqual(replayed);
    }
  });

  it("lands on the recorded session's final panes", () => {
    expect(replayed.lastSeq).toBe(234);
    expect(replayed.cycle).toBe(5);
    expect(replayed.mode).toBe("performance");
    expect(replayed.wm.map((r) => r.id)).toEqual([21, 22, 28, 29, 30, 31, 32]);
    expect(replayed.wm.map((r) => r.concept)).toContain(
      "(tell me debra (want me (know me (phone-number debra))))",
    );
    const statuses = new Map(replayed.goals.map((r) => [r.id, r.status]));
    expect(statuses.get(1)).toBe("FAILED");
    expect(statuses.get(4)).toBe("FAILED");
    expect(statuses.get(6)).toBe("SUCCEEDED");
    expect(statuses.get(8)).toBe("ACTIVE");
    expect(replayed.goals.find((r) => r.id === 4)?.imagined).toBe(true);
    expect(replayed.goals.find((r) => r.id === 8)?.imagined).toBe(false);
    expect(replayed.emotions).toEqual([
      { id: 1, kind: "NEG-AFFECT", intensity: 0.4, target: null, imagined: false },
      { id: 2, kind: "ANGER", intensity: 0.8, target: "debra", imagined: false },
      { id: 3, kind: "REJECTION", intensity: 0.8, target: "debra", imagined: false },
      { id: 4, kind: "POS-AFFECT", intensity: 0.6, target: null, imagined: true },
      { id: 5, kind: "REGRET", intensity: 0.48, target: null, imagined: false },
    ]);
    expect(replayed.problems).toEqual([]);
  });

  it("replaying the same stream again changes nothing", () => {
    expect(reduceAll(replayed, events)).toEqual(replayed);
  });
});

describe("pane text", () => {
  it("scales activation bars", () => {
    expect(activationBar(0)).toBe("----------");
    expect(activationBar(1)).toBe("##########");
    expect(activationBar(0.5)).toBe("#####-----");
    expect(activationBar(2)).toBe("##########");
    expect(activationBar(-1)).toBe("----------");
  });

  it("formats one line per row", () => {
    const state: ViewState = {
      ...initialView(),
      mode: "daydreaming",
      cycle: 3,
      wm: [
        { id: 7, concept: "(near me debra)", context: "real", activation: 1, pinned: true },
      ],
      goals: [
        {
          id: 2,
          kind: "DELTA",
          objective: "(m-job me)",
          importance: 0.8,
          context: "real",
          status: "SUCCEEDED",
          imagined: true,
        },
      ],
      emotions: [
        { id: 3, kind: "ANGER", intensity: 0.8, target: "debra", imagined: false },
      ],
    };
    expect(wmPaneLines(state)).toEqual([
      "W.7 [##########] (near me debra) (pinned)",
    ]);
    expect(goalPaneLines(state)).toEqual([
      "G.2 SUCCEEDED (m-job me) (DELTA, importance 0.8) (imagined)",
    ]);
    expect(emotionPaneLines(state)).toEqual([
      "E.3 ANGER [########--] 0.8 toward debra",
    ]);
    expect(statusLine(withConnection(state, "live"))).toBe(
      "DAYDREAMING | cycle 3 | live",
    );
    expect(statusLine(initialView())).toBe("NO MODE YET | cycle 0 | idle");
  });
});
