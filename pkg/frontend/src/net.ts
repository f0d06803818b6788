/** TCP transport: one socket speaking newline-delimited JSON. */

import { createConnection } from "node:net";

import { LineTransport, TransportFactory } from "./client.js";
import { LineBuffer } from "./protocol.js";

export function tcpTransport(host: string, port: number): TransportFactory {
  return (onLine, onClose) =>
    new Promise<LineTransport>((resolve, reject) => {
      const socket = createConnection({ host, port });
      const buffer = new LineBuffer();
      let opened = false;
      let failure: string | undefined;
      socket.setEncoding("utf8");
      socket.once("connect", () => {
        opened = true;
        resolve({
          send: (line) => socket.write(line + "\n"),
          close: () => socket.end(),
        });
      });
      socket.on("data", (chunk: string) => {
        for (const line of buffer.push(chunk)) {
          onLine(line);
        }
      });
      socket.on("error", (error) => {
        if (opened) {
          failure = error.message;
        } else {
          reject(error);
        }
      });
      socket.on("close", () => {
        if (opened) {
          onClose(failure);
        }
      });
    });
}
