// Page wiring. All analysis happens on the server; this file only moves
// service payloads into the view state and the view state into the DOM.

import { ServiceClient, ServiceError } from "./api.js";
import type { PanelEntry } from "./diagnostics.js";
import { buildPanel } from "./diagnostics.js";
import { DiagramLayout, layoutDiagram } from "./layout.js";
import { renderDiagramSvg } from "./render.js";
import {
  initialView,
  RequestSequencer,
  withBanner,
  withDetail,
  withGlobalInference,
  withInferenceFailure,
  withNodeInference,
  withUsecases,
  WorkspaceView,
} from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

class ConsoleApp {
  private view: WorkspaceView = initialView();
  private layout: DiagramLayout | null = null;
  private readonly sequencer = new RequestSequencer();
  private readonly client = new ServiceClient("");

  async start(): Promise<void> {
    el<HTMLSelectElement>("usecase").addEventListener("change", (event) => {
      const name = (event.target as HTMLSelectElement).value;
      void this.selectUsecase(name);
    });
    el<HTMLButtonElement>("infer-all").addEventListener("click", () => {
      void this.inferGlobal();
    });
    el<HTMLButtonElement>("retry").addEventListener("click", () => {
      void this.loadWorkspace();
    });
    el<HTMLButtonElement>("parse").addEventListener("click", () => {
      void this.parseText();
    });
    el<HTMLDivElement>("diagram").addEventListener("click", (event) => {
      const group = (event.target as Element).closest("[data-node]");
      if (group) {
        void this.inferNode(group.getAttribute("data-node") ?? "");
      }
    });
    el<HTMLUListElement>("diagnostics").addEventListener("click", (event) => {
      const row = (event.target as Element).closest("[data-node]");
      const node = row?.getAttribute("data-node");
      if (node) {
        this.focusNode(node);
      }
    });
    await this.loadWorkspace();
  }

  private async loadWorkspace(): Promise<void> {
    try {
      const listing = await this.client.usecases();
      this.view = withUsecases(this.view, listing.usecases);
      if (this.view.selected !== null) {
        await this.selectUsecase(this.view.selected);
      } else {
        this.layout = null;
        this.render();
      }
    } catch (error) {
      this.fail(error, "cannot reach the diagram service");
    }
  }

  private async selectUsecase(name: string): Promise<void> {
    try {
      const [detail, edg] = await Promise.all([
        this.client.usecase(name),
        this.client.edg(name),
      ]);
      this.view = withDetail(this.view, detail, edg);
      this.layout = layoutDiagram(detail.usecase);
      el<HTMLTextAreaElement>("source").value = detail.text;
      this.render();
    } catch (error) {
      this.fail(error, `cannot load use case '${name}'`);
    }
  }

  private async inferNode(target: string): Promise<void> {
    const name = this.view.selected;
    if (name === null) {
      return;
    }
    const ticket = this.sequencer.begin();
    try {
      const [infer, prune] = await Promise.all([
        this.client.infer(name, target),
        this.client.prune(name, target),
      ]);
      if (!this.sequencer.isCurrent(ticket)) {
        return; // a newer request superseded this one
      }
      this.view = withNodeInference(this.view, infer, prune);
    } catch (error) {
      if (!this.sequencer.isCurrent(ticket)) {
        return;
      }
      if (error instanceof ServiceError) {
        this.view = withInferenceFailure(this.view, error.diagnostic);
      } else {
        this.fail(error, "inference request failed");
        return;
      }
    }
    this.render();
  }

  private async inferGlobal(): Promise<void> {
    const name = this.view.selected;
    if (name === null) {
      return;
    }
    const ticket = this.sequencer.begin();
    try {
      const infer = await this.client.infer(name);
      if (!this.sequencer.isCurrent(ticket)) {
        return;
      }
      this.view = withGlobalInference(this.view, infer);
    } catch (error) {
      if (!this.sequencer.isCurrent(ticket)) {
        return;
      }
      if (error instanceof ServiceError) {
        this.view = withInferenceFailure(this.view, error.diagnostic);
      } else {
        this.fail(error, "inference request failed");
        return;
      }
    }
    this.render();
  }

  private async parseText(): Promise<void> {
    const text = el<HTMLTextAreaElement>("source").value;
    try {
      const parsed = await this.client.parse(text);
      this.view = { ...this.view, panel: buildPanel(parsed.diagnostics) };
      el<HTMLSpanElement>("parse-status").textContent =
        parsed.document === null ? "parse failed" : "parsed ok";
    } catch (error) {
      this.fail(error, "parse request failed");
      return;
    }
    this.renderPanel();
  }

  private fail(error: unknown, fallback: string): void {
    const message =
      error instanceof ServiceError ? error.message : fallback;
    this.view = withBanner(this.view, message);
    this.render();
  }

  private focusNode(node: string): void {
    const group = document.querySelector(`#diagram [data-node="${node}"]`);
    if (!group) {
      return;
    }
    group.classList.add("flash");
    group.scrollIntoView({ block: "center", inline: "nearest" });
    window.setTimeout(() => group.classList.remove("flash"), 900);
  }

  private render(): void {
    const banner = el<HTMLDivElement>("banner");
    banner.hidden = this.view.banner === null;
    el<HTMLSpanElement>("banner-text").textContent = this.view.banner ?? "";

    const select = el<HTMLSelectElement>("usecase");
    select.innerHTML = "";
    for (const name of this.view.usecases) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      option.selected = name === this.view.selected;
      select.appendChild(option);
    }

    const diagram = el<HTMLDivElement>("diagram");
    if (this.layout === null) {
      diagram.innerHTML = '<p class="empty">No use cases in this workspace.</p>';
    } else {
      diagram.innerHTML = renderDiagramSvg(this.layout, this.view.overlay);
    }

    const status = el<HTMLSpanElement>("overlay-status");
    if (this.view.overlay.mode === "node") {
      status.textContent =
        `${this.view.overlay.target}: ${this.view.overlay.edges.length} edge(s), ` +
        `context {${this.view.overlay.highlighted.join(", ")}}`;
    } else if (this.view.overlay.mode === "global") {
      status.textContent = `all nodes: ${this.view.overlay.edges.length} edge(s)`;
    } else {
      status.textContent = "select a node to infer its dependencies";
    }

    this.renderPanel();
  }

  private renderPanel(): void {
    const list = el<HTMLUListElement>("diagnostics");
    list.innerHTML = "";
    if (this.view.panel.length === 0) {
      const row = document.createElement("li");
      row.className = "all-clear";
      row.textContent = "no issues";
      list.appendChild(row);
      return;
    }
    for (const entry of this.view.panel) {
      list.appendChild(this.panelRow(entry));
    }
  }

  private panelRow(entry: PanelEntry): HTMLLIElement {
    const row = document.createElement("li");
    row.className = `diagnostic ${entry.severity}`;
    if (entry.node !== null) {
      row.setAttribute("data-node", entry.node);
    }
    const code = document.createElement("span");
    code.className = "code";
    code.textContent = entry.code;
    row.appendChild(code);
    const message = document.createElement("span");
    message.className = "message";
    message.textContent = entry.message;
    row.appendChild(message);
    if (entry.dtypes !== null) {
      const types = document.createElement("span");
      types.className = "dtypes";
      types.textContent = `${entry.dtypes[0]} to ${entry.dtypes[1]}`;
      row.appendChild(types);
    }
    if (entry.hint !== null) {
      const hint = document.createElement("span");
      hint.className = "hint";
      hint.textContent = entry.hint;
      row.appendChild(hint);
    }
    return row;
  }
}

window.addEventListener("DOMContentLoaded", () => {
  void new ConsoleApp().start();
});
