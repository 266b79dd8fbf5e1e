"""Minimal MQTT 3.1.1 over TCP: packet codec, a blocking QoS-1 client,
and an in-process scriptable broker for integration runs.

Only the subset the device needs is implemented (CONNECT/CONNACK,
PUBLISH QoS 0/1, PUBACK, SUBSCRIBE/SUBACK, PING, DISCONNECT), but it is
the real wire format, so the client also talks to a stock broker.
"""

from .client import MqttClient  # noqa: F401
from .broker import StubBroker  # noqa: F401
