/** Typed client for the portal API. */
export class ApiError extends Error {
    constructor(status, code, detail) {
        super(detail);
        this.status = status;
        this.code = code;
    }
    get windowClosed() {
        return this.code === "config-window-closed";
    }
}
async function request(path, init) {
    const response = await fetch(path, {
        headers: { "Content-Type": "application/json" },
        ...init,
    });
    const text = await response.text();
    const body = text ? JSON.parse(text) : {};
    if (!response.ok) {
        const err = body;
        throw new ApiError(response.status, err.error ?? "unknown", err.detail ?? response.statusText);
    }
    return body;
}
export function getState() {
    return request("/api/state");
}
export function getNetworks() {
    return request("/api/networks").then((b) => b.networks);
}
export function getNetworkInfo() {
    return request("/api/network/info");
}
export function joinNetwork(ssid, passphrase) {
    return request("/api/network", {
        method: "POST",
        body: JSON.stringify({ ssid, passphrase }),
    });
}
export function getOptions() {
    return request("/api/application/options");
}
export function submitApplication(form) {
    return request("/api/application", {
        method: "POST",
        body: JSON.stringify(form),
    }).then(() => undefined);
}
export function sendPump(action) {
    return request("/api/pump", {
        method: "POST",
        body: JSON.stringify({ action }),
    }).then(() => undefined);
}
