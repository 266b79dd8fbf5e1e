/** Portal single-page app: hash routing, state polling, live stream. */
import * as api from "./api.js";
import { TileStore, canSubmitApplication, canTogglePump, projectCountdown, pumpStatusTopic, tileTopics, validateApplicationForm, } from "./model.js";
import { adminPage, connectivityBanner, countdownLine, el, formRow, infoPage, networkTable, pumpCard, selectInput, tileCard, } from "./render.js";
import { TelemetryStream } from "./stream.js";
const POLL_INTERVAL_MS = 1000;
const RENDER_INTERVAL_MS = 250;
const TOPIC_PREFIX = "/usp";
const ctx = {
    state: null,
    stateFetchedAtMs: 0,
    unreachable: false,
    tiles: new TileStore(),
    streamStatus: "connecting",
    toast: null,
};
const root = document.getElementById("app");
const stream = new TelemetryStream("/api/stream", {
    onEvent: (event) => {
        ctx.tiles.applyEvent(event, Date.now());
        if (location.hash.startsWith("#/dashboard"))
            render();
    },
    onStatus: (status) => {
        ctx.streamStatus = status;
        if (location.hash.startsWith("#/dashboard"))
            render();
    },
});
async function pollState() {
    try {
        ctx.state = await api.getState();
        ctx.stateFetchedAtMs = Date.now();
        ctx.unreachable = false;
    }
    catch (error) {
        if (error instanceof api.ApiError)
            return; // API answered; not connectivity
        ctx.unreachable = true;
    }
}
function toast(message) {
    ctx.toast = message;
    setTimeout(() => {
        ctx.toast = null;
        render();
    }, 4000);
    render();
}
// -- pages -------------------------------------------------------------------
function renderAdmin() {
    if (!ctx.state)
        return el("section", { class: "page" }, "Loading…");
    const countdown = projectCountdown(ctx.state, ctx.stateFetchedAtMs, Date.now());
    return adminPage(ctx.state, countdown);
}
async function renderNetworkConfig() {
    const page = el("section", { class: "page" });
    page.append(el("h1", {}, "Network configuration"));
    const networks = await api.getNetworks();
    let selected = null;
    const form = el("form", { class: "join-form", id: "join-form" });
    const passphrase = el("input", {
        type: "password",
        id: "passphrase",
        name: "passphrase",
        placeholder: "passphrase (WPA2)",
    });
    const status = el("p", { class: "form-status", id: "join-status" });
    const submit = el("button", { type: "submit" }, "Connect");
    form.append(passphrase, submit, status);
    form.addEventListener("submit", async (event) => {
        event.preventDefault();
        if (!selected) {
            status.textContent = "pick a network first";
            return;
        }
        try {
            const joined = await api.joinNetwork(selected.ssid, passphrase.value);
            status.textContent = `connected to ${joined.ssid}`;
            render();
        }
        catch (error) {
            status.textContent =
                error instanceof api.ApiError && error.windowClosed
                    ? "configuration window closed"
                    : String(error instanceof Error ? error.message : error);
        }
    });
    page.append(networkTable(networks, (network) => {
        selected = network;
        status.textContent = `joining ${network.ssid}`;
    }), form);
    return page;
}
async function renderInfo() {
    return infoPage(await api.getNetworkInfo());
}
async function renderApplication() {
    const page = el("section", { class: "page" });
    page.append(el("h1", {}, "Application"));
    const state = ctx.state;
    const options = await api.getOptions();
    const committed = state?.application ?? null;
    const enabled = state ? canSubmitApplication(state.phase) : false;
    if (state?.phase === "config") {
        page.append(countdownLine(projectCountdown(state, ctx.stateFetchedAtMs, Date.now())));
    }
    else {
        page.append(el("div", { class: "banner", id: "window-closed" }, "Configuration window closed."));
    }
    const crop = selectInput("crop", options.crops, committed?.crop);
    const soil = selectInput("soil", options.soils, committed?.soil);
    const plantDate = el("input", {
        type: "date",
        id: "plant_date",
        name: "plant_date",
        value: committed?.plant_date ?? "",
    });
    const area = el("input", {
        type: "number", id: "area_m2", name: "area_m2", step: "0.1", min: "0",
        value: committed ? String(committed.area_m2) : "",
    });
    const flow = el("input", {
        type: "number", id: "flow_lph", name: "flow_lph", step: "1", min: "0",
        value: committed ? String(committed.flow_lph) : "",
    });
    const form = el("form", { class: "application-form", id: "application-form" });
    const status = el("p", { class: "form-status", id: "application-status" });
    const fields = [
        ["crop", "Crop", crop],
        ["soil", "Soil type", soil],
        ["plant_date", "Plantation date", plantDate],
        ["area_m2", "Irrigated area (m²)", area],
        ["flow_lph", "Pump flow (L/h)", flow],
    ];
    const rows = new Map();
    for (const [name, label, input] of fields) {
        const row = formRow({ name, label, input });
        rows.set(name, row);
        form.append(row);
    }
    const submit = el("button", { type: "submit" }, "Save to device");
    if (!enabled) {
        submit.setAttribute("disabled", "disabled");
        for (const input of [crop, soil, plantDate, area, flow]) {
            input.setAttribute("disabled", "disabled");
        }
    }
    form.append(submit, status);
    form.addEventListener("submit", async (event) => {
        event.preventDefault();
        for (const row of rows.values()) {
            row.querySelector(".field-error")?.remove();
        }
        const raw = {
            crop: crop.value,
            soil: soil.value,
            plant_date: plantDate.value,
            area_m2: area.value,
            flow_lph: flow.value,
        };
        const errors = validateApplicationForm(raw);
        if (Object.keys(errors).length > 0) {
            for (const [field, message] of Object.entries(errors)) {
                rows.get(field)?.append(el("span", { class: "field-error", "data-field": field }, message));
            }
            return;
        }
        try {
            await api.submitApplication({
                crop: raw.crop,
                soil: raw.soil,
                plant_date: raw.plant_date,
                area_m2: Number(raw.area_m2),
                flow_lph: Number(raw.flow_lph),
            });
            toast("Saved to device.");
        }
        catch (error) {
            status.textContent =
                error instanceof api.ApiError && error.windowClosed
                    ? "configuration window closed"
                    : String(error instanceof Error ? error.message : error);
        }
    });
    page.append(form);
    return page;
}
function renderDashboard() {
    const page = el("section", { class: "page" });
    page.append(el("h1", {}, "Live dashboard"));
    if (ctx.streamStatus !== "live") {
        page.append(el("div", { class: "banner", id: "stream-status" }, ctx.streamStatus));
    }
    const state = ctx.state;
    const grid = el("div", { class: "tile-grid" });
    const now = Date.now();
    for (const spec of tileTopics(TOPIC_PREFIX)) {
        const tile = ctx.tiles.get(spec.topic);
        const stale = state ? ctx.tiles.isStale(spec.topic, state, now) : tile === undefined;
        grid.append(tileCard(spec.label, spec.unit, tile, stale));
    }
    const pumpTile = ctx.tiles.get(pumpStatusTopic(TOPIC_PREFIX));
    const pumpOn = pumpTile ? pumpTile.payload === "on" : state?.pump.on ?? false;
    grid.append(pumpCard(pumpOn, state ? canTogglePump(state.phase) : false, async (action) => {
        try {
            await api.sendPump(action);
        }
        catch (error) {
            toast(String(error instanceof Error ? error.message : error));
        }
    }));
    page.append(grid);
    return page;
}
// -- router / main loop ------------------------------------------------------
let renderEpoch = 0;
async function render() {
    const epoch = ++renderEpoch;
    const hash = location.hash || "#/";
    let page;
    try {
        if (hash.startsWith("#/network") && !hash.startsWith("#/network-info") && hash !== "#/info") {
            page = await renderNetworkConfig();
        }
        else if (hash === "#/info" || hash.startsWith("#/network-info")) {
            page = await renderInfo();
        }
        else if (hash.startsWith("#/application")) {
            page = await renderApplication();
        }
        else if (hash.startsWith("#/dashboard")) {
            page = renderDashboard();
        }
        else {
            page = renderAdmin();
        }
    }
    catch {
        page = el("section", { class: "page" });
        page.append(connectivityBanner());
    }
    if (epoch !== renderEpoch)
        return; // a newer render superseded this one
    root.replaceChildren();
    if (ctx.unreachable)
        root.append(connectivityBanner());
    if (ctx.toast)
        root.append(el("div", { class: "toast" }, ctx.toast));
    root.append(el("header", {}, el("a", { href: "#/" }, "fieldpod")), page);
}
async function tick() {
    await pollState();
    await render();
}
window.addEventListener("hashchange", () => void render());
setInterval(() => void tick(), POLL_INTERVAL_MS);
setInterval(() => {
    // Smooth countdown between polls without refetching.
    if (ctx.state?.phase === "config" && (location.hash === "#/" || location.hash === "")) {
        const node = document.getElementById("countdown");
        if (node && ctx.state) {
            const seconds = projectCountdown(ctx.state, ctx.stateFetchedAtMs, Date.now());
            node.textContent = `Configuration window closes in ${Math.ceil(seconds)} s`;
        }
    }
}, RENDER_INTERVAL_MS);
stream.start();
void tick();
