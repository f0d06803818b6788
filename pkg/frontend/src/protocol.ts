/**
 * The wire protocol: newline-delimited JSON, consumed verbatim.
 *
 * The engine streams one `{"event": ...}` object per session event and
 * answers each command with one `{"ok": ...}` or `{"error": ...}` line.
 * Events caused by a command arrive before that command's reply.
 */

export interface SessionEvent {
  seq: number;
  cycle: number;
  kind: string;
  data: Record<string, unknown>;
}

export type ServerMessage =
  | { event: SessionEvent }
  | { ok: unknown }
  | { error: string };

export type Command =
  | { command: "submit"; text: string }
  | { command: "set-mode"; mode: "performance" | "daydreaming" }
  | { command: "run"; cycles: number | "until-quiescent" }
  | { command: "interrupt" }
  | { command: "snapshot" };

export class ProtocolError extends Error {}

/** Reassembles lines from arbitrarily chunked transport reads. */
export class LineBuffer {
  private remainder = "";

  push(chunk: string): string[] {
    const pieces = (this.remainder + chunk).split("\n");
    this.remainder = pieces.pop() ?? "";
    return pieces.map((p) => p.replace(/\r$/, "")).filter((p) => p.length > 0);
  }

  /** Anything held back waiting for its newline. */
  pending(): string {
    return this.remainder;
  }
}

export function decodeServerLine(line: string): ServerMessage {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (cause) {
    throw new ProtocolError(`not JSON: ${line}`);
  }
  if (typeof parsed !== "object" || parsed === null) {
    throw new ProtocolError(`not an object: ${line}`);
  }
  const message = parsed as Record<string, unknown>;
  if ("event" in message) {
    const event = message.event as Record<string, unknown>;
    if (
      typeof event !== "object" ||
      event === null ||
      typeof event.seq !== "number" ||
      typeof event.cycle !== "number" ||
      typeof event.kind !== "string" ||
      typeof event.data !== "object" ||
      event.data === null
    ) {
      throw new ProtocolError(`malformed event: ${line}`);
    }
    return { event: event as unknown as SessionEvent };
  }
  if ("ok" in message) {
    return { ok: message.ok };
  }
  if ("error" in message) {
    return { error: String(message.error) };
  }
  throw new ProtocolError(`neither event, ok, nor error: ${line}`);
}

export function encodeCommand(command: Command): string {
  return JSON.stringify(command);
}

/**
 * The command bar grammar.  A leading slash selects a command; anything
 * else is submitted as input text.  A parse failure returns an error
 * string and nothing is sent.
 */
export function parseCommandLine(line: string): Command | { parseError: string } {
  const trimmed = line.trim();
  if (trimmed.length === 0) {
    return { parseError: "empty command" };
  }
  if (!trimmed.startsWith("/")) {
    return { command: "submit", text: trimmed };
  }
  const [word, ...rest] = trimmed.slice(1).split(/\s+/);
  const arg = rest.join(" ");
  switch (word) {
    case "mode":
      if (arg === "performance" || arg === "daydreaming") {
        return { command: "set-mode", mode: arg };
      }
      return { parseError: `mode must be performance or daydreaming, got "${arg}"` };
    case "run":
      if (arg === "until-quiescent") {
        return { command: "run", cycles: arg };
      }
      if (/^\d+$/.test(arg)) {
        return { command: "run", cycles: Number(arg) };
      }
      return { parseError: `run takes a count or until-quiescent, got "${arg}"` };
    case "interrupt":
      if (arg.length > 0) {
        return { parseError: "interrupt takes no argument" };
      }
      return { command: "interrupt" };
    case "snapshot":
      if (arg.length > 0) {
        return { parseError: "snapshot takes no argument" };
      }
      return { command: "snapshot" };
    default:
      return { parseError: `unknown command /${word}` };
  }
}
