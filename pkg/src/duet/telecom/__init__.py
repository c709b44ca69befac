"""Telecom troubleshooting domain: CRM + mocked phone over a shared world."""

from .catalog import SAMPLE_QUOTAS, TelecomRenderer, generate_universe, telecom_groups
from .domain import DOMAIN_NAME, build_environment, seed_fixture_digests, seed_world
from .status import NetworkStatus, derive_network_status, render_status_bar

__all__ = [
    "DOMAIN_NAME",
    "NetworkStatus",
    "SAMPLE_QUOTAS",
    "TelecomRenderer",
    "build_environment",
    "derive_network_status",
    "generate_universe",
    "render_status_bar",
    "seed_fixture_digests",
    "seed_world",
    "telecom_groups",
]
