/** Wire types for the device portal JSON API. */

export type Phase = "config" | "setup" | "operational" | "fault";

export interface ApplicationView {
  crop: string;
  soil: string;
  plant_date: string;
  area_m2: number;
  flow_lph: number;
}

export interface DeviceStateView {
  device_id: string;
  phase: Phase;
  countdown_s: number;
  time_scale: number;
  sample_period_s: number;
  sim_elapsed_s: number;
  application: ApplicationView | null;
  pump: { on: boolean; since: string | null };
  broker_connected: boolean;
  fault_reason: string | null;
}

export interface NetworkView {
  ssid: string;
  rssi_dbm: number;
  security: "open" | "wpa2";
  connected: boolean;
}

export interface NetworkInfoView {
  connected: NetworkView | null;
  networks: NetworkView[];
}

export interface OptionsView {
  crops: string[];
  soils: string[];
}

/** One server-sent event on /api/stream. */
export interface TopicEvent {
  topic: string;
  payload: string;
  ts: string;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
}
