import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";

import { AnnotationApi } from "../src/api.js";
import { AnnotationController } from "../src/state.js";

/** Live round trip against the real Python service: label 10 queried
 * sentences through the UI controller, with a forced server restart in the
 * middle to prove the session resumes without data loss. */

const EST_TAGS = [
  "L", "D", "G", "T", "O-org", "P", "ST", "B", "W",
  "UL", "US", "UB", "E", "O",
];

const FIXTURE = join(fileURLToPath(new URL(".", import.meta.url)),
  "serve_fixture.py");
const PORT = 8765 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
const stateDir = mkdtempSync(join(tmpdir(), "seqlab-ui-"));
const statePath = join(stateDir, "state.json");

async function startServer(): Promise<void> {
  server = spawn("python3", [FIXTURE, statePath, String(PORT)], {
    stdio: "ignore",
  });
  for (let i = 0; i < 100; i++) {
    try {
      const resp = await fetch(`${BASE}/session/status`);
      if (resp.status === 200) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service did not come up");
}

async function stopServer(): Promise<void> {
  if (!server) return;
  const child = server;
  server = null;
  const gone = new Promise((resolve) => child.once("exit", resolve));
  child.kill("SIGKILL");
  await gone;
}

afterAll(async () => {
  await stopServer();
  rmSync(stateDir, { recursive: true, force: true });
});

describe("UI round trip against a live service", () => {
  it("labels 10 sentences across a forced restart", async () => {
    await startServer();
    const controller = new AnnotationController(new AnnotationApi(BASE));
    const before = await controller.refreshStatus();
    const submitted: string[][] = [];

    const labelOne = async () => {
      const query = await controller.loadNext();
      expect(query).not.toBeNull();
      // every wire tag must come from the recognized tag palette
      for (const tag of query!.labels) expect(EST_TAGS).toContain(tag);
      for (const tok of query!.tokens) {
        expect(query!.labels).toContain(tok.suggestion);
      }
      submitted.push([...controller.draft]);
      expect(await controller.submit()).toBe(true);
    };

    for (let i = 0; i < 5; i++) await labelOne();
    const midStatus = await controller.refreshStatus();
    expect(midStatus.labeled).toBe(before.labeled + 5);

    // forced restart: kill the server and bring it back on the same state
    await stopServer();
    await startServer();
    const resumed = await controller.refreshStatus();
    expect(resumed.labeled).toBe(midStatus.labeled);
    expect(resumed.round).toBe(midStatus.round);

    for (let i = 0; i < 5; i++) await labelOne();
    const after = await controller.refreshStatus();
    expect(after.labeled).toBe(before.labeled + 10);
    expect(submitted.length).toBe(10);
    for (const labels of submitted) {
      for (const tag of labels) expect(EST_TAGS).toContain(tag);
    }
  }, 120_000);
});
