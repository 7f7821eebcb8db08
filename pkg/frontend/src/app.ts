/** Single-page client: setup screen, round-by-round move panel, transcript,
 * outcome panel, model graph and the winning-time-label overlay.
 *
 * The client performs no game-rule computation: every button corresponds to
 * an entry of the server's legal-move menu, and machine replies arrive by
 * polling the authoritative view. */

import { ApiClient, ApiError, Move, Player, View } from "./api.js";
import { FIG2_DEFAULT_FORMULA, FIG3_DEFAULT_FORMULA, FIG3_MODEL } from "./models.js";
import {
  GraphData,
  finiteGraph,
  labelColor,
  labelRows,
  lazyGraph,
  movePanel,
  ordinalTextOk,
  statusLine,
  transcriptLines,
  visitedStates,
} from "./viewmodel.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface AppOptions {
  baseUrl: string;
  root: HTMLElement;
  pollIntervalMs?: number;
}

export class App {
  readonly api: ApiClient;
  private root: HTMLElement;
  private pollIntervalMs: number;
  private timer: ReturnType<typeof setInterval> | null = null;
  private inflight = 0;
  private idleWaiters: (() => void)[] = [];

  sessionId: string | null = null;
  view: View | null = null;
  private modelJson: typeof FIG3_MODEL | null = null;
  private labelsVisible = false;

  constructor(options: AppOptions) {
    this.api = new ApiClient(options.baseUrl);
    this.root = options.root;
    this.pollIntervalMs = options.pollIntervalMs ?? 500;
    this.renderSetup();
  }

  /** Resolves once no UI action is in flight; lets tests await the UI.
   * Whole actions are tracked (not single requests), so the counter stays
   * positive from a click until the last render it caused. */
  idle(): Promise<void> {
    if (this.inflight === 0) {
      return Promise.resolve();
    }
    return new Promise((resolve) => this.idleWaiters.push(resolve));
  }

  private track<T>(work: Promise<T>): Promise<T> {
    this.inflight += 1;
    return work.finally(() => {
      this.inflight -= 1;
      if (this.inflight === 0) {
        for (const waiter of this.idleWaiters.splice(0)) {
          waiter();
        }
      }
    });
  }

  /** Run a complete user action under the in-flight counter. */
  private action(work: () => Promise<void>): Promise<void> {
    return this.track(work());
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
      node.setAttribute(key, value);
    }
    if (text !== undefined) {
      node.textContent = text;
    }
    return node;
  }

  // -- setup screen ---------------------------------------------------------

  private renderSetup(): void {
    this.root.innerHTML = "";
    const form = this.el("div", { id: "setup", class: "panel" });
    form.appendChild(this.el("h2", {}, "New evaluation game"));

    const modelSelect = this.el("select", { id: "model-kind" });
    for (const [value, label] of [
      ["fig3", "six-state chain (finite)"],
      ["fig2", "infinite grid (lazy)"],
      ["custom", "custom model JSON"],
    ]) {
      modelSelect.appendChild(this.el("option", { value }, label));
    }
    form.appendChild(this.labelled("Model", modelSelect));
    const customJson = this.el("textarea", {
      id: "model-json",
      rows: "6",
      placeholder: "paste model JSON",
    });
    form.appendChild(customJson);

    const formula = this.el("input", {
      id: "formula",
      value: FIG3_DEFAULT_FORMULA,
    });
    form.appendChild(this.labelled("Formula", formula));

    const state = this.el("input", { id: "state", value: "q0" });
    form.appendChild(this.labelled("Initial state", state));

    const mode = this.el("select", { id: "mode" });
    for (const value of ["bounded", "finitely-bounded", "unbounded"]) {
      mode.appendChild(this.el("option", { value }, value));
    }
    form.appendChild(this.labelled("Semantics mode", mode));

    const gamma = this.el("input", { id: "gamma", value: "auto" });
    form.appendChild(this.labelled("Time-limit bound", gamma));

    const role = this.el("select", { id: "role" });
    for (const [value, label] of [
      ["eloise", "play Eloise"],
      ["abelard", "play Abelard"],
      ["both", "play both sides"],
      ["watch", "watch machine vs machine"],
    ]) {
      role.appendChild(this.el("option", { value }, label));
    }
    form.appendChild(this.labelled("Role", role));

    const scriptE = this.el("select", { id: "script-e" });
    for (const value of ["none", "fig2-eloise-n", "fig2-eloise-omega", "fig2-eloise-diag"]) {
      scriptE.appendChild(this.el("option", { value }, value));
    }
    form.appendChild(this.labelled("Machine Eloise script (lazy)", scriptE));
    const scriptA = this.el("select", { id: "script-a" });
    for (const value of ["none", "fig2-abelard"]) {
      scriptA.appendChild(this.el("option", { value }, value));
    }
    form.appendChild(this.labelled("Machine Abelard script (lazy)", scriptA));
    const scriptN = this.el("input", { id: "script-n", type: "number", placeholder: "n" });
    form.appendChild(this.labelled("Script parameter", scriptN));

    const start = this.el("button", { id: "start" }, "Start session");
    start.addEventListener("click", () => void this.startFromForm());
    form.appendChild(start);
    form.appendChild(this.el("div", { id: "setup-error", class: "error" }));
    this.root.appendChild(form);

    const game = this.el("div", { id: "game", class: "hidden" });
    game.appendChild(this.el("div", { id: "status" }));
    game.appendChild(this.el("div", { id: "formula-view" }));
    game.appendChild(this.el("div", { id: "outcome", class: "outcome" }));
    game.appendChild(this.el("div", { id: "moves" }));
    const columns = this.el("div", { class: "columns" });
    const left = this.el("div", {});
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("id", "graph");
    svg.setAttribute("width", "420");
    svg.setAttribute("height", "300");
    left.appendChild(svg);
    const labelsToggle = this.el("button", { id: "labels-toggle" }, "toggle label overlay");
    labelsToggle.addEventListener("click", () => void this.toggleLabels());
    left.appendChild(labelsToggle);
    left.appendChild(this.el("div", { id: "labels-panel" }));
    columns.appendChild(left);
    const right = this.el("div", {});
    right.appendChild(this.el("h3", {}, "Transcript"));
    right.appendChild(this.el("ol", { id: "transcript" }));
    columns.appendChild(right);
    game.appendChild(columns);
    this.root.appendChild(game);
  }

  private labelled(text: string, control: HTMLElement): HTMLElement {
    const wrapper = this.el("label", { class: "field" });
    wrapper.appendChild(this.el("span", {}, text + ": "));
    wrapper.appendChild(control);
    return wrapper;
  }

  private value(id: string): string {
    const node = this.root.querySelector<HTMLInputElement>(`#${id}`);
    return node ? node.value : "";
  }

  startFromForm(): Promise<void> {
    return this.action(() => this.doStartFromForm());
  }

  private async doStartFromForm(): Promise<void> {
    const kind = this.value("model-kind");
    const roleChoice = this.value("role");
    const roles: Record<Player, "human" | "machine"> = {
      E: roleChoice === "eloise" || roleChoice === "both" ? "human" : "machine",
      A: roleChoice === "abelard" || roleChoice === "both" ? "human" : "machine",
    };
    const setup: Parameters<ApiClient["createSession"]>[0] = {
      state: this.value("state"),
      formula: this.value("formula") || FIG2_DEFAULT_FORMULA,
      mode: { kind: this.value("mode"), gammaBound: this.value("gamma") || "auto" },
      roles,
    };
    if (kind === "fig3") {
      setup.model = FIG3_MODEL;
      this.modelJson = FIG3_MODEL;
    } else if (kind === "fig2") {
      setup.lazyModel = "fig2";
      this.modelJson = null;
    } else {
      try {
        const parsed = JSON.parse(this.value("model-json"));
        setup.model = parsed;
        this.modelJson = parsed;
      } catch (error) {
        this.showSetupError(`bad model JSON: ${error}`);
        return;
      }
    }
    const scripts: NonNullable<typeof setup.scripts> = {};
    const n = this.value("script-n") === "" ? undefined : Number(this.value("script-n"));
    if (roles.E === "machine" && this.value("script-e") !== "none") {
      scripts.E = { name: this.value("script-e"), n };
    }
    if (roles.A === "machine" && this.value("script-a") !== "none") {
      scripts.A = { name: this.value("script-a"), n };
    }
    if (Object.keys(scripts).length > 0) {
      setup.scripts = scripts;
    }
    try {
      const created = await this.track(this.api.createSession(setup));
      this.sessionId = created.id;
      this.showSetupError("");
      this.root.querySelector("#setup")?.classList.add("hidden");
      this.root.querySelector("#game")?.classList.remove("hidden");
      await this.applyView(created.view);
    } catch (error) {
      this.showSetupError(this.describeError(error));
    }
  }

  private describeError(error: unknown): string {
    if (error instanceof ApiError) {
      const body = error.body as { errors?: string[]; error?: string } | null;
      if (body?.errors) {
        return body.errors.join("; ");
      }
      if (body?.error) {
        return body.error;
      }
    }
    return String(error);
  }

  private showSetupError(message: string): void {
    const node = this.root.querySelector("#setup-error");
    if (node) {
      node.textContent = message;
    }
  }

  /** Attach to an existing session and rebuild the view from the server. */
  loadSession(id: string): Promise<void> {
    return this.action(async () => {
      this.sessionId = id;
      this.root.querySelector("#setup")?.classList.add("hidden");
      this.root.querySelector("#game")?.classList.remove("hidden");
      const view = await this.api.getView(id);
      await this.applyView(view);
    });
  }

  // -- game loop ------------------------------------------------------------

  private async applyView(view: View): Promise<void> {
    this.view = view;
    await this.renderGame();
    if (view.machinePending && view.winner === null) {
      this.startPolling();
    } else {
      this.stopPolling();
    }
  }

  private startPolling(): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      void this.refresh();
    }, this.pollIntervalMs);
  }

  private stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  refresh(): Promise<void> {
    return this.action(async () => {
      if (!this.sessionId) {
        return;
      }
      const view = await this.api.getView(this.sessionId);
      await this.applyView(view);
    });
  }

  submitMove(move: Move): Promise<void> {
    return this.action(async () => {
      if (!this.sessionId || !this.view || !this.view.legalMoves) {
        return;
      }
      const actor = this.view.legalMoves.actor;
      try {
        const view = await this.api.postMove(
          this.sessionId,
          actor,
          move,
          this.view.version,
        );
        await this.applyView(view);
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          const view = await this.api.getView(this.sessionId);
          await this.applyView(view);
        }
        this.setMoveError(this.describeError(error));
      }
    });
  }

  private setMoveError(message: string): void {
    const node = this.root.querySelector("#move-error");
    if (node) {
      node.textContent = message;
    }
  }

  // -- rendering --------------------------------------------------------------

  private async renderGame(): Promise<void> {
    const view = this.view;
    if (!view) {
      return;
    }
    this.text("#status", statusLine(view));
    const formulaView = this.root.querySelector("#formula-view");
    if (formulaView) {
      formulaView.innerHTML = "";
      formulaView.appendChild(this.el("div", {}, `goal: ${view.rootFormula}`));
      if (view.activeFormula && view.activeFormula !== view.rootFormula) {
        const active = this.el("div", { class: "active-sub" });
        active.appendChild(this.el("span", {}, "now debating: "));
        active.appendChild(this.el("strong", {}, view.activeFormula));
        formulaView.appendChild(active);
      }
      if (view.embedded) {
        formulaView.appendChild(
          this.el(
            "div",
            { class: "embedded-info" },
            `embedded game on ${view.embedded.formula}; ` +
              `verifier ${view.embedded.verifier}, controller ${view.embedded.controller}`,
          ),
        );
      }
    }
    this.text("#outcome", view.winner !== null
      ? (view.winner === "E" ? "Eloise" : "Abelard") + ` wins (${view.reason})`
      : "");
    this.renderMoves();
    await this.renderTranscriptAndGraph();
    if (this.labelsVisible) {
      await this.renderLabels();
    }
  }

  private text(selector: string, value: string): void {
    const node = this.root.querySelector(selector);
    if (node) {
      node.textContent = value;
    }
  }

  private renderMoves(): void {
    const container = this.root.querySelector("#moves");
    if (!container || !this.view) {
      return;
    }
    container.innerHTML = "";
    container.appendChild(this.el("div", { id: "move-error", class: "error" }));
    const panel = movePanel(this.view.legalMoves);
    if (!panel) {
      return;
    }
    if (panel.kind === "buttons") {
      for (const button of panel.buttons) {
        const node = this.el(
          "button",
          { class: "move-btn", "data-move": JSON.stringify(button.move) },
          button.label,
        );
        node.addEventListener("click", () => void this.submitMove(button.move));
        container.appendChild(node);
      }
      return;
    }
    if (panel.kind === "ordinal-entry") {
      const hint = panel.finiteOnly
        ? `announce a natural below ${panel.below}`
        : `announce an ordinal below ${panel.below} (e.g. 3 or w)`;
      container.appendChild(this.el("div", {}, hint));
      for (const quick of panel.quick) {
        const node = this.el(
          "button",
          { class: "move-btn", "data-move": JSON.stringify(quick.move) },
          quick.label,
        );
        node.addEventListener("click", () => void this.submitMove(quick.move));
        container.appendChild(node);
      }
      const input = this.el("input", { id: "ordinal-input", placeholder: panel.below });
      const submit = this.el("button", { id: "ordinal-submit" }, "announce");
      submit.addEventListener("click", () => {
        if (ordinalTextOk(input.value, panel.finiteOnly)) {
          void this.submitMove(input.value.trim());
        } else {
          this.setMoveError("not a valid limit here");
        }
      });
      container.appendChild(input);
      container.appendChild(submit);
      return;
    }
    // profile entry
    const selects: Record<string, HTMLSelectElement | HTMLInputElement> = {};
    for (const { agent, options } of panel.agents) {
      if (options === "naturals") {
        const input = this.el("input", {
          class: "profile-input",
          "data-agent": agent,
          type: "number",
          min: "0",
          value: "0",
        });
        selects[agent] = input;
        container.appendChild(this.labelled(`agent ${agent}`, input));
      } else {
        const select = this.el("select", {
          class: "profile-select",
          "data-agent": agent,
        });
        for (const option of options) {
          select.appendChild(this.el("option", { value: option }, option));
        }
        selects[agent] = select;
        container.appendChild(this.labelled(`agent ${agent}`, select));
      }
    }
    const submit = this.el("button", { id: "profile-submit" }, "commit actions");
    submit.addEventListener("click", () => {
      const move: Record<string, string> = {};
      for (const [agent, control] of Object.entries(selects)) {
        move[agent] = control.value;
      }
      void this.submitMove(move);
    });
    container.appendChild(submit);
  }

  private async renderTranscriptAndGraph(): Promise<void> {
    if (!this.sessionId || !this.view) {
      return;
    }
    const transcript = await this.track(this.api.getTranscript(this.sessionId));
    const list = this.root.querySelector("#transcript");
    if (list) {
      list.innerHTML = "";
      for (const line of transcriptLines(transcript.moves)) {
        list.appendChild(this.el("li", {}, line));
      }
    }
    const graph =
      this.view.modelKind === "finite" && this.modelJson
        ? finiteGraph(this.modelJson, this.view.state)
        : lazyGraph(visitedStates(transcript.moves), this.view.state);
    this.renderGraph(graph);
  }

  private renderGraph(graph: GraphData): void {
    const svg = this.root.querySelector("#graph");
    if (!svg) {
      return;
    }
    svg.innerHTML = "";
    const defs = document.createElementNS(SVG_NS, "defs");
    defs.innerHTML =
      '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" ' +
      'markerWidth="6" markerHeight="6" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#555"/></marker>';
    svg.appendChild(defs);
    const position = new Map(graph.nodes.map((node) => [node.id, node]));
    for (const edge of graph.edges) {
      const from = position.get(edge.from);
      const to = position.get(edge.to);
      if (!from || !to) {
        continue;
      }
      const line = document.createElementNS(SVG_NS, "line");
      const isLoop = edge.from === edge.to;
      if (isLoop) {
        const circle = document.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", String(from.x + 18));
        circle.setAttribute("cy", String(from.y - 18));
        circle.setAttribute("r", "12");
        circle.setAttribute("fill", "none");
        circle.setAttribute("stroke", "#777");
        svg.appendChild(circle);
        continue;
      }
      line.setAttribute("x1", String(from.x));
      line.setAttribute("y1", String(from.y));
      line.setAttribute("x2", String(to.x));
      line.setAttribute("y2", String(to.y));
      line.setAttribute("stroke", "#555");
      line.setAttribute("marker-end", "url(#arrow)");
      svg.appendChild(line);
    }
    for (const node of graph.nodes) {
      const group = document.createElementNS(SVG_NS, "g");
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(node.x));
      circle.setAttribute("cy", String(node.y));
      circle.setAttribute("r", "16");
      circle.setAttribute("class", "graph-node");
      circle.setAttribute("data-state", node.id);
      circle.setAttribute(
        "fill",
        node.current ? "#1565c0" : node.frontier ? "#eeeeee" : "#ffffff",
      );
      circle.setAttribute("stroke", node.frontier ? "#bbb" : "#333");
      if (node.frontier) {
        circle.setAttribute("stroke-dasharray", "3 3");
      }
      group.appendChild(circle);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(node.x));
      label.setAttribute("y", String(node.y + 30));
      label.setAttribute("text-anchor", "middle");
      label.setAttribute("font-size", "11");
      label.textContent = node.id;
      group.appendChild(label);
      svg.appendChild(group);
    }
  }

  toggleLabels(): Promise<void> {
    return this.action(async () => {
      this.labelsVisible = !this.labelsVisible;
      const panel = this.root.querySelector("#labels-panel");
      if (!this.labelsVisible) {
        if (panel) {
          panel.innerHTML = "";
        }
        return;
      }
      await this.renderLabels();
    });
  }

  private async renderLabels(): Promise<void> {
    const panel = this.root.querySelector("#labels-panel");
    if (!panel || !this.sessionId || !this.view) {
      return;
    }
    panel.innerHTML = "";
    try {
      const overlay = await this.track(this.api.getLabels(this.sessionId));
      const states = this.view.states ?? [];
      panel.appendChild(
        this.el(
          "div",
          {},
          `labels for ${overlay.contextFormula} at bound ${overlay.gamma}`,
        ),
      );
      const table = this.el("table", { id: "labels-table" });
      const head = this.el("tr", {});
      for (const caption of ["state", "Eloise", "Abelard"]) {
        head.appendChild(this.el("th", {}, caption));
      }
      table.appendChild(head);
      for (const row of labelRows(overlay, states)) {
        const tr = this.el("tr", {});
        tr.appendChild(this.el("td", {}, row.state));
        const eloise = this.el("td", {}, row.eloise);
        eloise.style.color = labelColor(row.eloise);
        tr.appendChild(eloise);
        const abelard = this.el("td", {}, row.abelard);
        abelard.style.color = labelColor(row.abelard);
        tr.appendChild(abelard);
        table.appendChild(tr);
      }
      panel.appendChild(table);
    } catch (error) {
      panel.appendChild(
        this.el("div", { class: "error" }, this.describeError(error)),
      );
    }
  }
}
