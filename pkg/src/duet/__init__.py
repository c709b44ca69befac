"""duet: a dual-control conversational-agent evaluation harness.

Two tool-wielding players (a support agent and a simulated user) act on a
shared two-database world; tasks are composed from verified atomic subtasks
and scored with pass^k reliability metrics.
"""

__version__ = "0.1.0"
