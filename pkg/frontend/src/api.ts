/** Typed client for the portal API. */

import type {
  ApiErrorBody,
  DeviceStateView,
  NetworkInfoView,
  NetworkView,
  OptionsView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail: string,
  ) {
    super(detail);
  }

  get windowClosed(): boolean {
    return this.code === "config-window-closed";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const text = await response.text();
  const body = text ? JSON.parse(text) : {};
  if (!response.ok) {
    const err = body as ApiErrorBody;
    throw new ApiError(response.status, err.error ?? "unknown", err.detail ?? response.statusText);
  }
  return body as T;
}

export function getState(): Promise<DeviceStateView> {
  return request<DeviceStateView>("/api/state");
}

export function getNetworks(): Promise<NetworkView[]> {
  return request<{ networks: NetworkView[] }>("/api/networks").then((b) => b.networks);
}

export function getNetworkInfo(): Promise<NetworkInfoView> {
  return request<NetworkInfoView>("/api/network/info");
}

export function joinNetwork(ssid: string, passphrase: string): Promise<NetworkView> {
  return request<NetworkView>("/api/network", {
    method: "POST",
    body: JSON.stringify({ ssid, passphrase }),
  });
}

export function getOptions(): Promise<OptionsView> {
  return request<OptionsView>("/api/application/options");
}

export interface ApplicationForm {
  crop: string;
  soil: string;
  plant_date: string;
  area_m2: number;
  flow_lph: number;
}

export function submitApplication(form: ApplicationForm): Promise<void> {
  return request<{ ok: boolean }>("/api/application", {
    method: "POST",
    body: JSON.stringify(form),
  }).then(() => undefined);
}

export function sendPump(action: "on" | "off"): Promise<void> {
  return request<{ ok: boolean }>("/api/pump", {
    method: "POST",
    body: JSON.stringify({ action }),
  }).then(() => undefined);
}
