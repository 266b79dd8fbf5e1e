/** Pure view-model logic, kept DOM-free so it is directly testable.
 *
 * Invariants enforced here:
 *  - tile values are displayed verbatim: always some payload that was
 *    actually received, never derived or interpolated;
 *  - mutating actions are enabled exactly per device phase (application
 *    form only during the config window, pump toggle only while
 *    operational);
 *  - a tile turns stale once no update arrived for three sample
 *    periods (wall time, honoring the device's simulation speed-up).
 */
export const STALE_PERIODS = 3;
/** Countdown projected between /api/state polls: the server reports
 * nominal device-seconds, which tick down time_scale times faster than
 * the wall clock. */
export function projectCountdown(state, fetchedAtMs, nowMs) {
    const elapsedWallS = Math.max(0, nowMs - fetchedAtMs) / 1000;
    return Math.max(0, state.countdown_s - elapsedWallS * state.time_scale);
}
export function canSubmitApplication(phase) {
    return phase === "config";
}
export function canTogglePump(phase) {
    return phase === "operational";
}
export class TileStore {
    constructor() {
        this.tiles = new Map();
    }
    applyEvent(event, nowMs) {
        this.tiles.set(event.topic, {
            topic: event.topic,
            payload: event.payload,
            ts: event.ts,
            receivedAtMs: nowMs,
        });
    }
    get(topic) {
        return this.tiles.get(topic);
    }
    /** Wall milliseconds after which an un-updated tile counts as stale. */
    staleAfterMs(state) {
        return (STALE_PERIODS * state.sample_period_s * 1000) / state.time_scale;
    }
    isStale(topic, state, nowMs) {
        const tile = this.tiles.get(topic);
        if (!tile)
            return true; // nothing ever received
        return nowMs - tile.receivedAtMs > this.staleAfterMs(state);
    }
}
/** Client-side form validation; mirrors the server's field rules so
 * errors can surface inline before a round trip. */
export function validateApplicationForm(raw) {
    const errors = {};
    if (!raw.crop)
        errors.crop = "required";
    if (!raw.soil)
        errors.soil = "required";
    if (!/^\d{4}-\d{2}-\d{2}$/.test(raw.plant_date)) {
        errors.plant_date = "use an ISO date (YYYY-MM-DD)";
    }
    else if (Number.isNaN(Date.parse(raw.plant_date))) {
        errors.plant_date = "not a valid calendar date";
    }
    const area = Number(raw.area_m2);
    if (!raw.area_m2 || Number.isNaN(area) || area <= 0)
        errors.area_m2 = "must be a positive number";
    const flow = Number(raw.flow_lph);
    if (!raw.flow_lph || Number.isNaN(flow) || flow <= 0)
        errors.flow_lph = "must be a positive number";
    return errors;
}
/** Reconnect delays: exponential from half a second, capped at ten. */
export function backoffDelayMs(attempt, baseMs = 500, capMs = 10000) {
    return Math.min(capMs, baseMs * 2 ** Math.max(0, attempt));
}
export const SENSOR_TILES = [
    { topic: "/usp/temp", label: "Temperature", unit: "°C" },
    { topic: "/usp/humid", label: "Humidity", unit: "%RH" },
    { topic: "/usp/sm", label: "Soil moisture", unit: "%VWC" },
];
export function tileTopics(prefix) {
    return [
        { topic: `${prefix}/temp`, label: "Temperature", unit: "°C" },
        { topic: `${prefix}/humid`, label: "Humidity", unit: "%RH" },
        { topic: `${prefix}/sm`, label: "Soil moisture", unit: "%VWC" },
    ];
}
export function pumpStatusTopic(prefix) {
    return `${prefix}/status/pump`;
}
