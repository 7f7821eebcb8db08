/** End-to-end: a scripted browser session against the real HTTP service.
 *
 * Spawns the session service, mounts the app in a DOM, and plays through the
 * setup screen and move panel exactly as a human would: by clicking the
 * rendered controls. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, ChildProcess } from "node:child_process";

import { App } from "../src/app.js";

const PORT = 18431;
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const response = await fetch(`${BASE}/sessions/nope`);
      if (response.status === 404) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("session service did not come up");
}

beforeAll(async () => {
  service = spawn(
    "python3",
    [
      "-c",
      "import uvicorn; from atlgts.session_service import create_app; " +
        `uvicorn.run(create_app(), host='127.0.0.1', port=${PORT}, log_level='error')`,
    ],
    { stdio: "ignore" },
  );
  await waitForService();
});

afterAll(() => {
  service?.kill();
});

function mountApp(): App {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  return new App({ baseUrl: BASE, root, pollIntervalMs: 25 });
}

function setValue(id: string, value: string): void {
  const node = document.getElementById(id) as HTMLInputElement | HTMLSelectElement;
  expect(node, `missing #${id}`).toBeTruthy();
  node.value = value;
}

function clickStart(): void {
  (document.getElementById("start") as HTMLButtonElement).click();
}

function moveButtons(): HTMLButtonElement[] {
  return Array.from(document.querySelectorAll<HTMLButtonElement>(".move-btn"));
}

function clickMove(move: string): void {
  const button = moveButtons().find(
    (b) => b.getAttribute("data-move") === JSON.stringify(move),
  );
  expect(button, `no button for move ${move}`).toBeTruthy();
  button!.click();
}

function outcomeText(): string {
  return document.getElementById("outcome")?.textContent ?? "";
}

describe("fig3 session as human Eloise at bound 4", () => {
  it("playing the winning chain from q0 ends with an Eloise win", async () => {
    const app = mountApp();
    setValue("model-kind", "fig3");
    setValue("formula", "<<>> F p");
    setValue("state", "q0");
    setValue("mode", "bounded");
    setValue("gamma", "4");
    setValue("role", "eloise");
    clickStart();
    await app.idle();
    expect(app.sessionId).toBeTruthy();
    expect(app.view?.phase).toBe("announce");

    // Announce the winning limit via the quick button rendered from the menu.
    clickMove("3");
    await app.idle();

    // Keep declining the end offer while the chain walks toward p.
    for (let round = 0; round < 3; round++) {
      expect(app.view?.phase).toBe("controller-end");
      clickMove("continue");
      await app.idle();
    }
    expect(app.view?.winner).toBe("E");
    expect(outcomeText()).toContain("Eloise wins");

    // Replay determinism: a fresh client reloading the session id rebuilds
    // the identical terminal view.
    const sessionId = app.sessionId!;
    const fresh = mountApp();
    await fresh.loadSession(sessionId);
    await fresh.idle();
    expect(fresh.view?.winner).toBe("E");
    expect(fresh.view?.state).toBe(app.view?.state);
    expect(fresh.view?.transcriptLength).toBe(app.view?.transcriptLength);
    expect(outcomeText()).toContain("Eloise wins");
  });

  it("shows the label overlay explaining the machine's play", async () => {
    const app = mountApp();
    setValue("model-kind", "fig3");
    setValue("formula", "<<>> F p");
    setValue("state", "q0");
    setValue("mode", "bounded");
    setValue("gamma", "3");
    setValue("role", "eloise");
    clickStart();
    await app.idle();
    (document.getElementById("labels-toggle") as HTMLButtonElement).click();
    await app.idle();
    const table = document.getElementById("labels-table");
    expect(table).toBeTruthy();
    expect(table!.textContent).toContain("q1");
    expect(table!.textContent).toContain("lose");
    expect(table!.textContent).toContain("win");
  });
});

describe("fig2 finitely bounded session as human Eloise", () => {
  it("announcing 3 loses to the scripted opponent", async () => {
    const app = mountApp();
    setValue("model-kind", "fig2");
    setValue("formula", "<<>> F p");
    setValue("state", "q0");
    setValue("mode", "finitely-bounded");
    setValue("gamma", "auto");
    setValue("role", "eloise");
    setValue("script-a", "fig2-abelard");
    clickStart();
    await app.idle();
    expect(app.view?.phase).toBe("announce");
    expect(app.view?.legalMoves?.menu.kind).toBe("ordinal");

    // Finite-only menu: type the announcement and submit.
    const input = document.getElementById("ordinal-input") as HTMLInputElement;
    expect(input).toBeTruthy();
    input.value = "3";
    (document.getElementById("ordinal-submit") as HTMLButtonElement).click();
    await app.idle();

    // The scripted opponent answers the announcement; decline the end offers
    // until the clock runs out one short of the diagonal.
    while (app.view?.winner === null) {
      expect(app.view?.phase).toBe("controller-end");
      clickMove("continue");
      await app.idle();
    }
    expect(app.view?.winner).toBe("A");
    expect(outcomeText()).toContain("Abelard wins");
    expect(outcomeText()).toContain("time-exhausted-exit");

    // The lazy graph shows only the visited row plus a frontier ring.
    const nodes = Array.from(document.querySelectorAll("circle.graph-node"));
    const ids = nodes.map((n) => n.getAttribute("data-state"));
    expect(ids).toContain("q0");
    expect(ids).toContain("3,0");
    expect(ids.length).toBeLessThan(8);
  });

  it("rejects an infinite announcement client-side in finite-only menus", async () => {
    const app = mountApp();
    setValue("model-kind", "fig2");
    setValue("formula", "<<>> F p");
    setValue("state", "q0");
    setValue("mode", "finitely-bounded");
    setValue("role", "eloise");
    setValue("script-a", "fig2-abelard");
    clickStart();
    await app.idle();
    const input = document.getElementById("ordinal-input") as HTMLInputElement;
    input.value = "w";
    (document.getElementById("ordinal-submit") as HTMLButtonElement).click();
    await app.idle();
    expect(app.view?.phase).toBe("announce"); // nothing was sent
    expect(document.getElementById("move-error")?.textContent).toContain("not a valid");
  });
});

describe("setup validation surfaces server errors", () => {
  it("bad formulas surface the parser message with offset", async () => {
    const app = mountApp();
    setValue("model-kind", "fig3");
    setValue("formula", "p U q");
    setValue("role", "eloise");
    clickStart();
    await app.idle();
    expect(app.sessionId).toBeNull();
    const error = document.getElementById("setup-error")?.textContent ?? "";
    expect(error).toContain("offset");
  });
});
