"""Simulated Wi-Fi: scan table from the scenario, connect-by-flag.

No radio exists at desk scale; the seam (scan/apply/info) is what a real
wireless backend would implement.  Credentials persist to the device
data file and are never echoed back through any query.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .errors import NotFoundError, ValidationError
from .runtime import DeviceStore


class Security(Enum):
    OPEN = "open"
    WPA2 = "wpa2"


@dataclass(frozen=True)
class NetworkInfo:
    ssid: str
    rssi_dbm: int
    security: Security
    connected: bool = False

    def __post_init__(self):
        if self.rssi_dbm > 0:
            raise ValidationError("rssi_dbm", "must be <= 0")


@dataclass(frozen=True)
class NetworkConfig:
    ssid: str
    passphrase: str = ""

    def __post_init__(self):
        if not self.ssid:
            raise ValidationError("ssid", "must be nonempty")


class SimulatedWifi:
    """Thread-safe scan table with at most one connected network."""

    def __init__(self, scan_table: list[NetworkInfo], store: Optional[DeviceStore] = None):
        self._lock = threading.Lock()
        self._networks = [replace(n, connected=False) for n in scan_table]
        self._connected_ssid: Optional[str] = None
        self._store = store
        if store is not None:
            persisted = store.load_network()
            if persisted and any(n.ssid == persisted.get("ssid") for n in self._networks):
                self._connected_ssid = persisted["ssid"]

    def list_networks(self) -> list[NetworkInfo]:
        """Latest scan, strongest signal first."""
        with self._lock:
            table = [
                replace(n, connected=(n.ssid == self._connected_ssid)) for n in self._networks
            ]
        return sorted(table, key=lambda n: n.rssi_dbm, reverse=True)

    def apply(self, cfg: NetworkConfig) -> NetworkInfo:
        """Join a scanned network; WPA2 requires an 8+ character passphrase."""
        with self._lock:
            match = next((n for n in self._networks if n.ssid == cfg.ssid), None)
            if match is None:
                raise NotFoundError(f"network {cfg.ssid!r} not in scan results")
            if match.security is Security.WPA2 and len(cfg.passphrase) < 8:
                raise ValidationError("passphrase", "WPA2 needs at least 8 characters")
            self._connected_ssid = cfg.ssid
        if self._store is not None:
            self._store.save_network({"ssid": cfg.ssid, "passphrase": cfg.passphrase})
        return replace(match, connected=True)

    def connected(self) -> Optional[NetworkInfo]:
        with self._lock:
            ssid = self._connected_ssid
        if ssid is None:
            return None
        return next((n for n in self.list_networks() if n.ssid == ssid), None)
