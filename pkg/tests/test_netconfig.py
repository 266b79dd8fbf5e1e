"""Simulated Wi-Fi: scan ordering, join validation, persistence."""

import pytest

from fieldpod.errors import NotFoundError, ValidationError
from fieldpod.netconfig import NetworkConfig, NetworkInfo, Security, SimulatedWifi
from fieldpod.runtime import DeviceStore

SCAN = [
    NetworkInfo(ssid="CoffeeShop", rssi_dbm=-71, security=Security.OPEN),
    NetworkInfo(ssid="HomeLAN", rssi_dbm=-48, security=Security.WPA2),
    NetworkInfo(ssid="Neighbor", rssi_dbm=-82, security=Security.WPA2),
]


def test_scan_sorted_by_signal_strength():
    wifi = SimulatedWifi(SCAN)
    assert [n.ssid for n in wifi.list_networks()] == ["HomeLAN", "CoffeeShop", "Neighbor"]


def test_empty_scan():
    assert SimulatedWifi([]).list_networks() == []


def test_join_marks_exactly_one_connected():
    wifi = SimulatedWifi(SCAN)
    wifi.apply(NetworkConfig(ssid="HomeLAN", passphrase="hunter2hunter2"))
    connected = [n for n in wifi.list_networks() if n.connected]
    assert [n.ssid for n in connected] == ["HomeLAN"]
    wifi.apply(NetworkConfig(ssid="CoffeeShop"))
    connected = [n for n in wifi.list_networks() if n.connected]
    assert [n.ssid for n in connected] == ["CoffeeShop"]


def test_unknown_ssid_not_found():
    wifi = SimulatedWifi(SCAN)
    with pytest.raises(NotFoundError):
        wifi.apply(NetworkConfig(ssid="Ghost", passphrase="whatever1"))


def test_wpa2_requires_long_passphrase():
    wifi = SimulatedWifi(SCAN)
    with pytest.raises(ValidationError):
        wifi.apply(NetworkConfig(ssid="HomeLAN", passphrase="abc"))
    assert wifi.connected() is None


def test_open_network_allows_empty_passphrase():
    wifi = SimulatedWifi(SCAN)
    info = wifi.apply(NetworkConfig(ssid="CoffeeShop"))
    assert info.connected


def test_connection_persists_via_store(tmp_path):
    store = DeviceStore(tmp_path)
    wifi = SimulatedWifi(SCAN, store=store)
    wifi.apply(NetworkConfig(ssid="HomeLAN", passphrase="hunter2hunter2"))
    assert store.load_network()["ssid"] == "HomeLAN"
    # A rebooted device restores the connection flag from the data file.
    rebooted = SimulatedWifi(SCAN, store=store)
    assert rebooted.connected().ssid == "HomeLAN"


def test_positive_rssi_rejected():
    with pytest.raises(ValidationError):
        NetworkInfo(ssid="X", rssi_dbm=3, security=Security.OPEN)
