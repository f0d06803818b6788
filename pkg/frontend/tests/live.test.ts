import { ChildProcess, spawn } from "node:child_process";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConsoleClient } from "../src/client";
import { tcpTransport } from "../src/net";
import { Command, decodeServerLine, LineBuffer } from "../src/protocol";
import { initialView, reduceAll, ViewState } from "../src/view";

const REPO = fileURLToPath(new URL("../..", import.meta.url));

let engine: ChildProcess;
let port = 0;

beforeAll(async () => {
  engine = spawn(
    "python3",
    ["-m", "daydreamer.cli", "serve", "--host", "127.0.0.1", "--port", "0"],
    { cwd: REPO, stdio: ["ignore", "ignore", "pipe"] },
  );
  port = await new Promise<number>((resolve, reject) => {
    let said = "";
    engine.stderr!.setEncoding("utf8");
    engine.stderr!.on("data", (chunk: string) => {
      said += chunk;
      const match = said.match(/listening on 127\.0\.0\.1:(\d+)/);
      if (match) {
        resolve(Number(match[1]));
      }
    });
    engine.once("exit", (code) => {
      reject(new Error(`engine exited before listening (${code}): ${said}`));
    });
  });
});

afterAll(() => {
  engine.kill();
});

async function liveClient(): Promise<ConsoleClient> {
  const client = new ConsoleClient(tcpTransport("127.0.0.1", port));
  await client.connect();
  return client;
}

/** The packaged session script, translated line by line into commands. */
function scriptCommands(): Command[] {
  const text = readFileSync(`${REPO}/src/daydreamer/data/nuart.script`, "utf8");
  const commands: Command[] = [];
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (line.length === 0 || line.startsWith("#")) {
      continue;
    }
    const [word] = line.split(/\s+/, 1);
    const rest = line.slice(word.length).trim();
    if (word === "input") {
      commands.push({ command: "submit", text: rest });
    } else if (word === "mode") {
      commands.push({ command: "set-mode", mode: rest as "performance" | "daydreaming" });
    } else if (word === "run") {
      commands.push({
        command: "run",
        cycles: rest === "until-quiescent" ? rest : Number(rest),
      });
    } else if (word === "interrupt") {
      commands.push({ command: "interrupt" });
    } else {
      throw new Error(`unknown script line: ${line}`);
    }
  }
  return commands;
}

function recordedReplay(): ViewState {
  const buffer = new LineBuffer();
  const text = readFileSync(`${REPO}/tests/fixtures/nuart_events.ndjson`, "utf8")
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => `{"event": ${line}}\n`)
    .join("");
  const events = buffer.push(text).map((line) => {
    const message = decodeServerLine(line);
    if (!("event" in message)) {
      throw new Error("fixture line is not an event");
    }
    return message.event;
  });
  return reduceAll(initialView(), events);
}

describe("against a live engine", () => {
  it("a from-start session matches the recorded replay, panes and all", async () => {
    const client = await liveClient();
    for (const command of scriptCommands()) {
      const reply = await client.send(command);
      expect(reply).toHaveProperty("ok");
    }
    const golden = readFileSync(`${REPO}/tests/fixtures/nuart_golden_trace.txt`, "utf8");
    expect(client.state.transcript.join("\n") + "\n").toBe(golden);
    const replayed = recordedReplay();
    expect(client.state.transcript).toEqual(replayed.transcript);
    expect(client.state.wm).toEqual(replayed.wm);
    expect(client.state.goals).toEqual(replayed.goals);
    expect(client.state.emotions).toEqual(replayed.emotions);
    expect(client.state.mode).toBe(replayed.mode);
    expect(client.state.cycle).toBe(replayed.cycle);
    expect(client.state.lastSeq).toBe(replayed.lastSeq);
    client.close();
  });

  it("mode changes are visible by the time the reply arrives", async () => {
    const client = await liveClient();
    expect(await client.send({ command: "submit", text: "(near me debra)" })).toEqual({
      ok: "queued",
    });
    expect(await client.send({ command: "set-mode", mode: "performance" })).toEqual({
      ok: "performance",
    });
    expect(client.state.mode).toBe("performance");
    const transcript = client.state.transcript;
    const modeAt = transcript.indexOf("PERFORMANCE MODE");
    const wantAt = transcript.indexOf("I want to be going out with Debra.");
    expect(modeAt).toBeGreaterThanOrEqual(0);
    expect(wantAt).toBeGreaterThan(modeAt);
    client.close();
  });

  it("interrupts are visible by the time the reply arrives", async () => {
    const client = await liveClient();
    expect(await client.send({ command: "interrupt" })).toEqual({ ok: "interrupted" });
    expect(client.state.transcript).toContain("INTERRUPT");
    client.close();
  });

  it("engine errors come back as replies on a live connection", async () => {
    const client = await liveClient();
    const bad = { command: "set-mode", mode: "sometimes" } as unknown as Command;
    const reply = await client.send(bad);
    expect(reply).toHaveProperty("error");
    expect((reply as { error: string }).error).toContain("sometimes");
    const snapshot = await client.send({ command: "snapshot" });
    expect(snapshot).toHaveProperty("ok");
    client.close();
  });

  it("an unreachable endpoint shows an error state until a retry lands", async () => {
    let target = 1; // nothing listens on port 1
    const client = new ConsoleClient((onLine, onClose) =>
      tcpTransport("127.0.0.1", target)(onLine, onClose),
    );
    await expect(client.connect()).rejects.toThrow();
    expect(client.state.connection).toBe("error");
    expect(client.state.detail.length).toBeGreaterThan(0);
    target = port;
    await client.connect();
    expect(client.state.connection).toBe("live");
    expect(await client.send({ command: "snapshot" })).toHaveProperty("ok");
    client.close();
  });
});
