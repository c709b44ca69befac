"""User-side mocked phone tools: 15 read, 15 write.

User tools return only human-readable text. Every write renders the status
bar on the post-state so the simulated user always reports what actually
changed rather than what it believes changed.
"""

from __future__ import annotations

from ..engine import BoundTool, DomainError, ToolParam, ToolSpec
from ..world import USER, WorldState
from .status import derive_network_status, effective_data_remaining, line_for_phone_number, render_status_bar


def _yes_no(flag: bool) -> str:
    return "Yes" if flag else "No"


def _on_off(flag: bool) -> str:
    return "ON" if flag else "OFF"


def _with_bar(world: WorldState, text: str) -> str:
    return f"{text}\nStatus Bar: {render_status_bar(world)}"


# -- reads --------------------------------------------------------------

def get_network_status(world: WorldState) -> str:
    phone = world.user_db
    s = derive_network_status(world)
    return "\n".join(
        [
            f"Airplane Mode: {_on_off(phone['airplane_mode'])}",
            f"SIM Card Status: {s.sim_status}",
            f"Cellular Connection: {s.cellular_connection}",
            f"Cellular Signal: {s.signal}",
            f"Cellular Network Type: {s.network_type}",
            f"Mobile Data Allowed: {_yes_no(phone['mobile_data_enabled'])}",
            f"Roaming: {_yes_no(s.roaming_active)}",
            f"Data Roaming Allowed: {_yes_no(phone['data_roaming_enabled'])}",
            f"Wi-Fi Radio: {_on_off(phone['wifi_radio'])}",
            f"Wi-Fi Connected: {_yes_no(phone['wifi_connected'])}",
        ]
    )


def get_sim_status(world: WorldState) -> str:
    status = derive_network_status(world).sim_status
    return {
        "active": "The SIM card is active.",
        "missing": "No SIM card detected in the phone.",
        "invalid": "The SIM card is invalid or not recognized.",
        "locked": "The SIM card is locked and requires a PIN.",
    }[status]


def check_status_bar(world: WorldState) -> str:
    return f"Status Bar: {render_status_bar(world)}"


def run_speed_test(world: WorldState) -> str:
    speed = derive_network_status(world).data_speed
    return {
        "excellent": "Speed test result: excellent internet speed.",
        "slow": "Speed test result: very slow internet speed.",
        "none": "Speed test failed: no internet connection.",
    }[speed]


def get_data_usage_on_device(world: WorldState) -> str:
    line = line_for_phone_number(world.agent_db, world.user_db["user_phone_number"])
    plan = world.agent_db["plans"][line["plan_id"]]
    remaining = max(effective_data_remaining(line, plan), 0)
    return (
        f"Data used this cycle: {line['data_used_gb']} GB of {plan['data_limit_gb']} GB"
        f" (extra refueled: {line['data_refueling_gb']} GB). Remaining: {round(remaining, 3)} GB."
    )


def get_wifi_status(world: WorldState) -> str:
    phone = world.user_db
    return (
        f"Wi-Fi Radio: {_on_off(phone['wifi_radio'])}\n"
        f"Wi-Fi Connected: {_yes_no(phone['wifi_connected'])}"
    )


def get_apn_settings(world: WorldState) -> str:
    if world.user_db["apn_mms_correct"]:
        return "APN settings match the carrier defaults. MMS is configured correctly."
    return "APN settings differ from the carrier defaults. MMS may not work."


def get_battery_level(world: WorldState) -> str:
    return f"Battery level: {world.user_db['battery_percent']}%."


def can_send_mms_probe(world: WorldState) -> str:
    if derive_network_status(world).mms_working:
        return "Test MMS sent successfully."
    return "Test MMS failed to send."


def get_device_info(world: WorldState) -> str:
    phone = world.user_db
    return (
        f"Owner: {phone['user_name']}\n"
        f"Phone number: {phone['user_phone_number']}\n"
        f"Powered on: {_yes_no(phone['powered_on'])}"
    )


def check_airplane_mode(world: WorldState) -> str:
    return f"Airplane Mode is {_on_off(world.user_db['airplane_mode'])}."


def get_mobile_data_status(world: WorldState) -> str:
    return f"Mobile data is {'enabled' if world.user_db['mobile_data_enabled'] else 'disabled'}."


def get_data_roaming_status(world: WorldState) -> str:
    return f"Data roaming is {'allowed' if world.user_db['data_roaming_enabled'] else 'not allowed'}."


def get_roaming_status(world: WorldState) -> str:
    if derive_network_status(world).roaming_active:
        return "The phone is currently roaming on a partner network."
    return "The phone is not currently roaming."


def get_power_status(world: WorldState) -> str:
    return f"The phone is powered {'on' if world.user_db['powered_on'] else 'off'}."


# -- writes -------------------------------------------------------------

def toggle_airplane_mode(world: WorldState) -> str:
    phone = world.user_db
    phone["airplane_mode"] = not phone["airplane_mode"]
    return _with_bar(world, f"Airplane Mode is now {_on_off(phone['airplane_mode'])}.")


def reseat_sim_card(world: WorldState) -> str:
    sim = world.user_db["sim"]
    sim["seated"] = True
    sim["active"] = True
    return _with_bar(world, "SIM card re-seated successfully.")


def unlock_sim_with_pin(world: WorldState, pin: str) -> str:
    sim = world.user_db["sim"]
    if sim["lock_state"] != "pin_locked":
        return _with_bar(world, "The SIM card is not locked.")
    if pin != sim["pin"]:
        raise DomainError("Incorrect PIN. The SIM card remains locked.")
    sim["lock_state"] = "unlocked"
    return _with_bar(world, "SIM card unlocked successfully.")


def toggle_mobile_data(world: WorldState) -> str:
    phone = world.user_db
    phone["mobile_data_enabled"] = not phone["mobile_data_enabled"]
    state = "enabled" if phone["mobile_data_enabled"] else "disabled"
    return _with_bar(world, f"Mobile data is now {state}.")


def toggle_data_roaming(world: WorldState) -> str:
    phone = world.user_db
    phone["data_roaming_enabled"] = not phone["data_roaming_enabled"]
    state = "allowed" if phone["data_roaming_enabled"] else "not allowed"
    return _with_bar(world, f"Data roaming is now {state}.")


def toggle_wifi(world: WorldState) -> str:
    phone = world.user_db
    phone["wifi_radio"] = not phone["wifi_radio"]
    if not phone["wifi_radio"]:
        phone["wifi_connected"] = False  # radio off forces disconnect
    return _with_bar(world, f"Wi-Fi radio is now {_on_off(phone['wifi_radio'])}.")


def reboot_phone(world: WorldState) -> str:
    world.user_db["powered_on"] = True
    return _with_bar(world, "Phone rebooted.")


def reset_apn_settings(world: WorldState) -> str:
    world.user_db["apn_mms_correct"] = True
    return _with_bar(world, "APN settings have been reset to carrier defaults.")


def power_cycle(world: WorldState) -> str:
    world.user_db["powered_on"] = True
    return _with_bar(world, "Phone powered off and back on.")


def connect_wifi(world: WorldState) -> str:
    phone = world.user_db
    if not phone["wifi_radio"]:
        raise DomainError("Wi-Fi radio is off; turn it on before connecting.")
    phone["wifi_connected"] = True
    return _with_bar(world, "Connected to the saved Wi-Fi network.")


def disconnect_wifi(world: WorldState) -> str:
    world.user_db["wifi_connected"] = False
    return _with_bar(world, "Disconnected from Wi-Fi.")


def remove_sim_card(world: WorldState) -> str:
    world.user_db["sim"]["seated"] = False
    return _with_bar(world, "SIM card removed from the phone.")


def turn_phone_off(world: WorldState) -> str:
    world.user_db["powered_on"] = False
    return _with_bar(world, "The phone is now powered off.")


def charge_phone(world: WorldState) -> str:
    world.user_db["battery_percent"] = 100
    return _with_bar(world, "Battery charged to 100%.")


def lock_sim(world: WorldState) -> str:
    world.user_db["sim"]["lock_state"] = "pin_locked"
    return _with_bar(world, "SIM PIN lock enabled.")


def user_tool_registry() -> dict[str, BoundTool]:
    def spec(name: str, kind: str, doc: str, *params: ToolParam) -> ToolSpec:
        return ToolSpec(name=name, owner=USER, kind=kind, params=tuple(params), doc=doc)

    reads = [
        (spec("get_network_status", "read", "Show the phone's full network status panel."), get_network_status),
        (spec("get_sim_status", "read", "Check whether the SIM card is active, missing, invalid or locked."), get_sim_status),
        (spec("check_status_bar", "read", "Read the phone's status bar."), check_status_bar),
        (spec("run_speed_test", "read", "Run an internet speed test over mobile data."), run_speed_test),
        (spec("get_data_usage_on_device", "read", "Show this cycle's data usage as reported by the phone."), get_data_usage_on_device),
        (spec("get_wifi_status", "read", "Show Wi-Fi radio and connection state."), get_wifi_status),
        (spec("get_apn_settings", "read", "Inspect the APN/MMS configuration."), get_apn_settings),
        (spec("get_battery_level", "read", "Read the battery level."), get_battery_level),
        (spec("can_send_mms_probe", "read", "Try sending a test MMS to yourself."), can_send_mms_probe),
        (spec("get_device_info", "read", "Show the device owner, phone number and power state."), get_device_info),
        (spec("check_airplane_mode", "read", "Check whether Airplane Mode is on."), check_airplane_mode),
        (spec("get_mobile_data_status", "read", "Check whether mobile data is enabled."), get_mobile_data_status),
        (spec("get_data_roaming_status", "read", "Check whether data roaming is allowed."), get_data_roaming_status),
        (spec("get_roaming_status", "read", "Check whether the phone is currently roaming."), get_roaming_status),
        (spec("get_power_status", "read", "Check whether the phone is powered on."), get_power_status),
    ]
    writes = [
        (spec("toggle_airplane_mode", "write", "Turn Airplane Mode on or off."), toggle_airplane_mode),
        (spec("reseat_sim_card", "write", "Remove and firmly re-insert the SIM card."), reseat_sim_card),
        (
            spec(
                "unlock_sim_with_pin", "write", "Enter the SIM PIN to unlock the SIM card.",
                ToolParam("pin", description="The 4-digit SIM PIN"),
            ),
            unlock_sim_with_pin,
        ),
        (spec("toggle_mobile_data", "write", "Enable or disable mobile data."), toggle_mobile_data),
        (spec("toggle_data_roaming", "write", "Allow or disallow data while roaming."), toggle_data_roaming),
        (spec("toggle_wifi", "write", "Turn the Wi-Fi radio on or off."), toggle_wifi),
        (spec("reboot_phone", "write", "Restart the phone."), reboot_phone),
        (spec("reset_apn_settings", "write", "Reset APN settings to carrier defaults."), reset_apn_settings),
        (spec("power_cycle", "write", "Power the phone fully off and on again."), power_cycle),
        (spec("connect_wifi", "write", "Connect to the saved Wi-Fi network."), connect_wifi),
        (spec("disconnect_wifi", "write", "Disconnect from the current Wi-Fi network."), disconnect_wifi),
        (spec("remove_sim_card", "write", "Take the SIM card out of the phone."), remove_sim_card),
        (spec("turn_phone_off", "write", "Power the phone off."), turn_phone_off),
        (spec("charge_phone", "write", "Charge the battery to full."), charge_phone),
        (spec("lock_sim", "write", "Enable the SIM PIN lock."), lock_sim),
    ]
    return {bound.spec.name: bound for bound in (BoundTool(s, f) for s, f in reads + writes)}
