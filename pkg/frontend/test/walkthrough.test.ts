/**
 * End-to-end walkthrough against the real fixture service: the pipeline
 * runs once, the Python API server is spawned, and the app is driven
 * through a DOM: search "death", open "Age at Death", click the keyword
 * chip "death", and land on Date of Death through the related list.
 */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, isDocumentedEndpoint } from "../src/api.js";
import { App } from "../src/app.js";

const PORT = 8983;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = path.resolve(
  path.dirname(fileURLToPath(import.meta.url)), "..", "..");

let server: ChildProcess | null = null;
let workdir: string;

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/health`);
      if (response.ok) return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service did not come up: ${lastError}`);
}

beforeAll(async () => {
  workdir = mkdtempSync(path.join(tmpdir(), "metakg-walkthrough-"));
  execFileSync(
    "metakg",
    ["all", "--config", path.join(REPO_ROOT, "fixtures", "fixture.toml"),
     "--workdir", workdir],
    { stdio: "pipe" },
  );
  server = spawn(
    "metakg",
    ["serve",
     "--graph", path.join(workdir, "graph.enriched.nt"),
     "--rules", path.join(workdir, "rules.txt"),
     "--embeddings", path.join(workdir, "embeddings.txt"),
     "--port", String(PORT)],
    { stdio: "ignore" },
  );
  await waitForServer();
}, 120_000);

afterAll(() => {
  server?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

interface Harness {
  app: App;
  api: ApiClient;
  mount: HTMLElement;
}

function makeApp(): Harness {
  const win = new Window({ url: "http://localhost/" });
  const doc = win.document as unknown as Document;
  const mount = doc.createElement("div");
  doc.body.appendChild(mount);
  const api = new ApiClient(BASE, (url, init) => fetch(url, init));
  const app = new App(doc, api, mount,
                      win as unknown as { location: { hash: string } });
  return { app, api, mount };
}

function buttons(mount: HTMLElement, selector: string): HTMLButtonElement[] {
  return Array.from(mount.querySelectorAll(selector)) as HTMLButtonElement[];
}

function buttonByText(mount: HTMLElement, selector: string,
                      text: string): HTMLButtonElement {
  const match = buttons(mount, selector).find(
    (b) => (b.textContent ?? "").trim() === text);
  if (!match) {
    const seen = buttons(mount, selector).map((b) => b.textContent);
    throw new Error(`no ${selector} with text ${text}; saw ${seen}`);
  }
  return match;
}

describe("fixture walkthrough", () => {
  it("search death -> Age at Death -> chip death -> Date of Death", async () => {
    const { app, api, mount } = makeApp();
    app.start();
    await app.idle();

    // issue the search the way a user would: type and submit
    const input = mount.querySelector("input.search-input") as HTMLInputElement;
    expect(input).toBeTruthy();
    input.value = "death";
    buttonByText(mount, "button.search-submit", "Search").click();
    await app.idle();

    const cardTitles = buttons(mount, "li.dataset-card button.dataset-link")
      .map((b) => b.textContent);
    expect(cardTitles).toContain("Age at Death");

    buttonByText(mount, "button.dataset-link", "Age at Death").click();
    await app.idle();
    expect(mount.querySelector("h1.title")?.textContent).toBe("Age at Death");

    const chipRow = mount.querySelector(".chip-row-keywords") as HTMLElement;
    const chipLabels = buttons(chipRow, "button.chip").map((b) => b.textContent);
    expect(chipLabels).toContain("death");

    buttonByText(chipRow, "button.chip", "death").click();
    await app.idle();

    const relatedTitles = buttons(mount, ".related-list button.dataset-link")
      .map((b) => (b.textContent ?? "").trim());
    expect(relatedTitles).toContain("Date of Death");

    // the walkthrough leaves a breadcrumb: the dataset, then the chip
    const crumbLabels = buttons(mount, "button.crumb")
      .map((b) => (b.textContent ?? "").trim());
    expect(crumbLabels).toEqual(["Age at Death", "death"]);

    // similar panel is populated because embeddings are loaded
    expect(mount.querySelector(".similar-list")).toBeTruthy();
    expect(mount.querySelector(".similar-unavailable")).toBeNull();

    // continuing the navigation opens the related dataset
    buttonByText(mount, ".related-list button.dataset-link", "Date of Death")
      .click();
    await app.idle();
    expect(mount.querySelector("h1.title")?.textContent).toBe("Date of Death");

    // every request the UI made during the walkthrough is documented
    expect(api.requestLog.length).toBeGreaterThan(0);
    for (const requested of api.requestLog) {
      expect(isDocumentedEndpoint(requested), requested).toBe(true);
    }
  }, 30_000);

  it("new search clears the breadcrumb", async () => {
    const { app, mount } = makeApp();
    app.start();
    await app.idle();
    app.navigate("#/dataset/age-at-death");
    await app.idle();
    expect(buttons(mount, "button.crumb").length).toBe(1);
    const form = mount.querySelector("form.search-form");
    expect(form).toBeNull(); // on the detail view
    app.navigate("#/search?q=pension");
    await app.idle();
    expect(buttons(mount, "button.crumb").length).toBe(0);
  }, 30_000);

  it("renders every view against the live service", async () => {
    const { app, api, mount } = makeApp();
    app.start();
    await app.idle();
    expect(mount.querySelector(".result-list")).toBeTruthy();

    app.navigate("#/rules?sort=pca_confidence&dir=desc");
    await app.idle();
    const ruleRows = mount.querySelectorAll("tr.rule-row");
    expect(ruleRows.length).toBe(2);

    app.navigate("#/query");
    await app.idle();
    buttonByText(mount, "button.saved-query",
                 'Datasets with keyword "death"').click();
    await app.idle();
    const cells = Array.from(mount.querySelectorAll(".query-results td"))
      .map((td) => td.textContent ?? "");
    expect(cells.some((c) => c.includes("age-at-death"))).toBe(true);

    for (const requested of api.requestLog) {
      expect(isDocumentedEndpoint(requested), requested).toBe(true);
    }
  }, 30_000);

  it("unknown dataset shows the retry banner", async () => {
    const { app, mount } = makeApp();
    app.start();
    await app.idle();
    app.navigate("#/dataset/this-does-not-exist");
    await app.idle();
    expect(mount.querySelector(".error-banner")).toBeTruthy();
    expect(mount.querySelector("button.retry")).toBeTruthy();
  }, 30_000);
});
