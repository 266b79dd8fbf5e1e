"""Stand-alone IoT irrigation device runtime, desk-scale.

Boots into a time-boxed configuration portal, then runs a perpetual
monitor/publish/actuate loop: sensor sampling (simulated or replayed),
MQTT telemetry with a compressed offline backlog, irrigation-schedule
computation from crop/soil/weather data, and hysteresis pump control
with remote manual override.
"""

__version__ = "0.1.0"
