/**
 * Session client: holds one connection and its view, pairing each
 * command with the reply it earns.
 *
 * The engine answers commands in order and emits any events caused by a
 * command before that command's reply, so a FIFO of waiters is enough to
 * match replies to senders.  All engine state stays on the other side of
 * the wire; this class only forwards commands and folds events.
 */

import {
  Command,
  decodeServerLine,
  encodeCommand,
  parseCommandLine,
  ProtocolError,
} from "./protocol.js";
import {
  initialView,
  reduce,
  ViewState,
  withConnection,
  withProblem,
} from "./view.js";

export interface LineTransport {
  send(line: string): void;
  close(): void;
}

/** Opens a transport, delivering whole lines and a single close notice. */
export type TransportFactory = (
  onLine: (line: string) => void,
  onClose: (error?: string) => void,
) => Promise<LineTransport>;

export type Reply = { ok: unknown } | { error: string };

interface Waiter {
  resolve: (reply: Reply) => void;
  reject: (error: Error) => void;
}

export class ConsoleClient {
  state: ViewState = initialView();

  private transport: LineTransport | null = null;
  private waiters: Waiter[] = [];

  constructor(private factory: TransportFactory, private onChange: (state: ViewState) => void = () => {}) {}

  private update(state: ViewState): void {
    this.state = state;
    this.onChange(state);
  }

  /**
   * Connect, resetting the view: a new connection is a new engine, so
   * nothing from the previous session may survive in the panes.
   */
  async connect(): Promise<void> {
    this.transport = null;
    this.update(withConnection(initialView(), "connecting"));
    try {
      this.transport = await this.factory(
        (line) => this.handleLine(line),
        (error) => this.handleClose(error),
      );
    } catch (error) {
      this.update(withConnection(this.state, "error", String(error)));
      throw error;
    }
    this.update(withConnection(this.state, "live"));
  }

  connected(): boolean {
    return this.transport !== null && this.state.connection === "live";
  }

  close(): void {
    this.transport?.close();
  }

  /** Send one command; resolves with the engine's reply to it. */
  send(command: Command): Promise<Reply> {
    if (!this.connected()) {
      return Promise.reject(new Error("not connected"));
    }
    const reply = new Promise<Reply>((resolve, reject) => {
      this.waiters.push({ resolve, reject });
    });
    this.transport!.send(encodeCommand(command));
    return reply;
  }

  /**
   * One line of user input.  Malformed input never reaches the wire; the
   * parse error comes back for inline display instead.
   */
  handleInput(raw: string): { sent: Promise<Reply> } | { parseError: string } {
    const parsed = parseCommandLine(raw);
    if ("parseError" in parsed) {
      return parsed;
    }
    return { sent: this.send(parsed) };
  }

  private handleLine(line: string): void {
    let message;
    try {
      message = decodeServerLine(line);
    } catch (error) {
      if (error instanceof ProtocolError) {
        this.update(withProblem(this.state, error.message));
        return;
      }
      throw error;
    }
    if ("event" in message) {
      this.update(reduce(this.state, message.event));
      return;
    }
    const waiter = this.waiters.shift();
    if (waiter === undefined) {
      this.update(withProblem(this.state, "reply without a pending command"));
      return;
    }
    waiter.resolve(message);
  }

  private handleClose(error?: string): void {
    this.transport = null;
    for (const waiter of this.waiters.splice(0)) {
      waiter.reject(new Error(error ?? "connection closed"));
    }
    if (error !== undefined) {
      this.update(withConnection(this.state, "error", error));
    } else {
      this.update(withConnection(this.state, "closed"));
    }
  }
}
