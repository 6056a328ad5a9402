// Browser wiring: query box with streamed transcript, trend panel with
// scale switcher and count/share toggle.

import { ServiceError, fetchTrends, submitQuery } from "./api.js";
import { answerCardHTML, errorBannerHTML, rejectionCardHTML, trendPanelHTML } from "./cards.js";
import { renderChartSVG } from "./chart.js";
import { SessionState } from "./session.js";
import type { TrendSeries } from "./types.js";

const session = new SessionState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function run(): void {
  const form = el<HTMLFormElement>("query-form");
  const input = el<HTMLInputElement>("query-input");
  const transcript = el<HTMLDivElement>("transcript");

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    void ask(text, transcript);
  });

  const trendForm = el<HTMLFormElement>("trend-form");
  trendForm.addEventListener("submit", (ev) => {
    ev.preventDefault();
    void showTrend();
  });
  el<HTMLSelectElement>("trend-scale").addEventListener("change", () => {
    void showTrend();
  });
  el<HTMLSelectElement>("trend-mode").addEventListener("change", () => {
    renderTrend();
  });
}

async function ask(text: string, transcript: HTMLDivElement): Promise<void> {
  const { entry, signal } = session.begin(text);
  const card = document.createElement("div");
  card.className = "entry";
  card.innerHTML = `<p class="query">${text.replace(/</g, "&lt;")}</p>`
    + `<div class="live"></div>`;
  transcript.append(card);
  const live = card.querySelector(".live") as HTMLDivElement;

  try {
    const answer = await submitQuery(text, {
      onChunk: (piece) => {
        session.appendText(entry, piece);
        live.textContent = entry.streamedText;
      },
      onChart: (spec) => {
        const figure = document.createElement("figure");
        figure.innerHTML = renderChartSVG(spec);
        card.append(figure);
      },
      onReferences: (hits) => {
        if (hits.length === 0) return;
        const links = hits
          .map((h) => `<li><a href="${h.url}" target="_blank" rel="noopener">`
            + `${h.title.replace(/</g, "&lt;")}</a> (${h.score})</li>`)
          .join("");
        card.insertAdjacentHTML("beforeend", `<ol class="citations">${links}</ol>`);
      },
    }, {}, signal);
    session.complete(entry, answer);
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    if (err instanceof ServiceError && err.answer) {
      session.fail(entry, err.message);
      live.innerHTML = rejectionCardHTML(err.answer);
      return;
    }
    const retriable = err instanceof ServiceError && err.retriable;
    session.fail(entry, (err as Error).message);
    live.innerHTML = errorBannerHTML((err as Error).message);
    if (retriable) {
      live.querySelector("[data-action=retry]")?.addEventListener("click", () => {
        card.remove();
        void ask(text, transcript);
      });
    }
  }
}

let lastSeries: TrendSeries | null = null;

async function showTrend(): Promise<void> {
  const topic = el<HTMLInputElement>("trend-topic").value.trim();
  const panel = el<HTMLDivElement>("trend-panel");
  if (!topic) {
    panel.innerHTML = errorBannerHTML("enter a topic first");
    return;
  }
  const scale = el<HTMLSelectElement>("trend-scale").value;
  const from = el<HTMLInputElement>("trend-from").value;
  const to = el<HTMLInputElement>("trend-to").value;
  try {
    lastSeries = await fetchTrends(topic, scale, from, to);
    renderTrend();
  } catch (err) {
    panel.innerHTML = errorBannerHTML((err as Error).message);
  }
}

function renderTrend(): void {
  if (!lastSeries) return;
  const mode = el<HTMLSelectElement>("trend-mode").value as "count" | "share";
  el<HTMLDivElement>("trend-panel").innerHTML = trendPanelHTML(lastSeries, mode);
}

document.addEventListener("DOMContentLoaded", run);

export { answerCardHTML, run };
