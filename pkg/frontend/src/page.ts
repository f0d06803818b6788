/**
 * Browser wiring: the read-only pane grid plus a status line and a
 * command bar.
 *
 * The page talks to the engine over a WebSocket that carries the very
 * same JSON lines as the TCP server (any TCP-to-WebSocket bridge will
 * do).  Everything rendered here is a projection of the ViewState; no
 * engine behaviour lives on this side.
 */

import { ConsoleClient, LineTransport, TransportFactory } from "./client.js";
import { LineBuffer } from "./protocol.js";
import {
  emotionPaneLines,
  goalPaneLines,
  statusLine,
  ViewState,
  wmPaneLines,
} from "./view.js";

export function wsTransport(url: string): TransportFactory {
  return (onLine, onClose) =>
    new Promise<LineTransport>((resolve, reject) => {
      const socket = new WebSocket(url);
      const buffer = new LineBuffer();
      let opened = false;
      let failure: string | undefined;
      socket.onopen = () => {
        opened = true;
        resolve({
          send: (line) => socket.send(line + "\n"),
          close: () => socket.close(),
        });
      };
      socket.onmessage = (message) => {
        for (const line of buffer.push(String(message.data))) {
          onLine(line);
        }
      };
      socket.onerror = () => {
        failure = "websocket error";
        if (!opened) {
          reject(new Error(`cannot reach ${url}`));
        }
      };
      socket.onclose = () => {
        if (opened) {
          onClose(failure);
        }
      };
    });
}

function pane(root: HTMLElement, classes: string, label: string): HTMLPreElement {
  const box = document.createElement("section");
  box.className = classes;
  const heading = document.createElement("h2");
  heading.textContent = label;
  const body = document.createElement("pre");
  box.append(heading, body);
  root.append(box);
  return body;
}

export function mount(root: HTMLElement, factory: TransportFactory): ConsoleClient {
  const status = document.createElement("div");
  status.className = "status";
  const retry = document.createElement("button");
  retry.textContent = "retry";
  retry.hidden = true;
  const header = document.createElement("header");
  header.append(status, retry);
  root.append(header);

  const transcript = pane(root, "pane transcript", "transcript");
  const panes = document.createElement("div");
  panes.className = "panes";
  root.append(panes);
  const wm = pane(panes, "pane wm", "working memory");
  const goals = pane(panes, "pane goals", "goals");
  const emotions = pane(panes, "pane emotions", "emotions");

  const form = document.createElement("form");
  const input = document.createElement("input");
  input.type = "text";
  input.placeholder = "concept, or /mode /run /interrupt /snapshot";
  const inputError = document.createElement("span");
  inputError.className = "input-error";
  form.append(input, inputError);
  root.append(form);

  const render = (state: ViewState): void => {
    status.textContent = statusLine(state);
    retry.hidden = state.connection !== "error" && state.connection !== "closed";
    transcript.textContent = state.transcript.join("\n");
    transcript.scrollTop = transcript.scrollHeight;
    wm.textContent = wmPaneLines(state).join("\n");
    goals.textContent = goalPaneLines(state).join("\n");
    emotions.textContent = emotionPaneLines(state).join("\n");
  };

  const client = new ConsoleClient(factory, render);
  render(client.state);

  form.addEventListener("submit", (submission) => {
    submission.preventDefault();
    const outcome = client.handleInput(input.value);
    if ("parseError" in outcome) {
      inputError.textContent = outcome.parseError;
      return;
    }
    inputError.textContent = "";
    input.value = "";
    outcome.sent
      .then((reply) => {
        if ("error" in reply) {
          inputError.textContent = reply.error;
        }
      })
      .catch((error: Error) => {
        inputError.textContent = error.message;
      });
  });

  retry.addEventListener("click", () => {
    client.connect().catch(() => {
      // the view already shows the error state
    });
  });

  return client;
}
