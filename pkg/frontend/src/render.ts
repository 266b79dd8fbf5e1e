/** DOM construction for the portal pages.  Thin: all decisions come
 * from model.ts, all data from api.ts. */

import type { DeviceStateView, NetworkInfoView, NetworkView } from "./types.js";
import { canSubmitApplication } from "./model.js";
import type { Tile } from "./model.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function phaseBadge(state: DeviceStateView): HTMLElement {
  const labels: Record<string, string> = {
    config: "configuration mode",
    setup: "setting up",
    operational: "operational",
    fault: "fault",
  };
  return el("span", { class: `badge badge-${state.phase}` }, labels[state.phase] ?? state.phase);
}

export function countdownLine(seconds: number): HTMLElement {
  return el(
    "p",
    { class: "countdown", id: "countdown" },
    `Configuration window closes in ${Math.ceil(seconds)} s`,
  );
}

export function connectivityBanner(): HTMLElement {
  return el(
    "div",
    { class: "banner banner-error" },
    "Device unreachable. Check that the device is powered and on your network.",
  );
}

export function adminPage(state: DeviceStateView, countdown: number): HTMLElement {
  const page = el("section", { class: "page" });
  page.append(el("h1", {}, `Device ${state.device_id}`), phaseBadge(state));
  if (state.phase === "config") page.append(countdownLine(countdown));
  if (state.phase === "fault" && state.fault_reason) {
    page.append(el("div", { class: "banner banner-error" }, `Fault: ${state.fault_reason}`));
  }
  const nav = el("nav", { class: "options" });
  nav.append(
    optionButton("Network configuration", "#/network", true),
    optionButton("Network information", "#/info", true),
    optionButton("Application", "#/application", canSubmitApplication(state.phase)),
    optionButton("Live dashboard", "#/dashboard", true),
  );
  page.append(nav);
  return page;
}

function optionButton(label: string, href: string, enabled: boolean): HTMLElement {
  const a = el("a", { class: enabled ? "option" : "option option-disabled", href }, label);
  if (!enabled) a.setAttribute("aria-disabled", "true");
  return a;
}

export function networkTable(networks: NetworkView[], onJoin?: (n: NetworkView) => void): HTMLElement {
  const table = el("table", { class: "networks" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "SSID"),
      el("th", {}, "Signal"),
      el("th", {}, "Security"),
      el("th", {}, ""),
    ),
  );
  for (const network of networks) {
    const row = el(
      "tr",
      { class: network.connected ? "connected" : "" },
      el("td", {}, network.ssid + (network.connected ? " ✓" : "")),
      el("td", {}, `${network.rssi_dbm} dBm`),
      el("td", {}, network.security.toUpperCase()),
    );
    const cell = el("td", {});
    if (onJoin && !network.connected) {
      const button = el("button", { type: "button" }, "Join");
      button.addEventListener("click", () => onJoin(network));
      cell.append(button);
    }
    row.append(cell);
    table.append(row);
  }
  return table;
}

export function infoPage(info: NetworkInfoView): HTMLElement {
  const page = el("section", { class: "page" });
  page.append(el("h1", {}, "Network information"));
  if (info.connected) {
    page.append(
      el(
        "p",
        { class: "connected-line" },
        `Connected to ${info.connected.ssid} (${info.connected.rssi_dbm} dBm, ` +
          `${info.connected.security.toUpperCase()})`,
      ),
    );
  } else {
    page.append(el("p", { class: "connected-line" }, "Not connected to any network."));
  }
  page.append(el("h2", {}, "Nearby networks"), networkTable(info.networks));
  return page;
}

export interface FormFieldSpec {
  name: string;
  label: string;
  input: HTMLElement;
  error?: string;
}

export function formRow(spec: FormFieldSpec): HTMLElement {
  const row = el("div", { class: "form-row" });
  row.append(el("label", { for: spec.name }, spec.label), spec.input);
  if (spec.error) row.append(el("span", { class: "field-error", "data-field": spec.name }, spec.error));
  return row;
}

export function selectInput(name: string, options: string[], value?: string): HTMLSelectElement {
  const select = el("select", { id: name, name });
  select.append(el("option", { value: "" }, "choose…"));
  for (const option of options) {
    const node = el("option", { value: option }, option);
    if (option === value) node.setAttribute("selected", "selected");
    select.append(node);
  }
  return select;
}

export function tileCard(
  label: string,
  unit: string,
  tile: Tile | undefined,
  stale: boolean,
): HTMLElement {
  const card = el("div", { class: stale ? "tile tile-stale" : "tile" });
  card.append(el("div", { class: "tile-label" }, label));
  // The payload is shown exactly as published; the unit is a caption.
  card.append(el("div", { class: "tile-value" }, tile ? tile.payload : "—"));
  card.append(el("div", { class: "tile-unit" }, unit));
  card.append(
    el(
      "div",
      { class: "tile-meta" },
      stale ? "stale" : tile ? `at ${tile.ts}` : "waiting for data",
    ),
  );
  return card;
}

export function pumpCard(on: boolean, enabled: boolean, onToggle: (next: "on" | "off") => void): HTMLElement {
  const card = el("div", { class: "tile pump" });
  card.append(el("div", { class: "tile-label" }, "Pump"));
  card.append(el("div", { class: "tile-value", id: "pump-state" }, on ? "ON" : "OFF"));
  const button = el("button", { type: "button", id: "pump-toggle" }, on ? "Turn off" : "Turn on");
  if (!enabled) button.setAttribute("disabled", "disabled");
  button.addEventListener("click", () => onToggle(on ? "off" : "on"));
  card.append(button);
  if (!enabled) card.append(el("div", { class: "tile-meta" }, "available while operational"));
  return card;
}
