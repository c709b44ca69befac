"""Built-in policies: scripted oracles for deterministic harness verification,
a null-agent lower bound, and the chat-completion adapter for external LLMs.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .engine import Environment, evaluate_assertion, to_chat_tool_declarations
from .orchestrator import PolicyError, PolicyView, RunConfig
from .prompts import STOP_TOKEN, TRANSFER_TOKEN
from .tasks import CompositeTask
from .world import AGENT, USER, Action, Event, GlobalState, IncomingMessage, Message, ToolCall, ToolResult

GREETING = "Hi! How can I help you today?"


def _latest_incoming_text(view: PolicyView, from_player: str) -> str | None:
    for event in reversed(view.visible_history):
        if (
            isinstance(event.observation, IncomingMessage)
            and event.observation.from_player == from_player
        ):
            return event.observation.text
    return None


def _last_own_tool_event(view: PolicyView) -> Event | None:
    for event in reversed(view.visible_history):
        if event.actor == view.role:
            if isinstance(event.action, ToolCall):
                return event
            return None
    return None


class OracleAgent:
    """Replays the task's known solution: executes its own calls and asks the
    user (by exact tool name) to perform theirs."""

    def __init__(self, task: CompositeTask, mode: str = "default"):
        self.plan = list(task.evaluation.expected_actions)
        self.mode = mode
        self.pointer = 0
        self.greeted = False
        self.waiting_for_user = False
        self.closed = False

    def decide(self, view: PolicyView) -> Action:
        if self.mode == "no_user":
            if self.pointer < len(self.plan):
                act = self.plan[self.pointer]
                self.pointer += 1
                return ToolCall(act.name, dict(act.args))
            return Message(STOP_TOKEN)

        if not self.greeted:
            self.greeted = True
            return Message(GREETING)
        if self.waiting_for_user:
            # Control only returns to the agent via a user message, so the
            # requested device action has been performed and reported.
            self.waiting_for_user = False
            self.pointer += 1
        while self.pointer < len(self.plan):
            act = self.plan[self.pointer]
            if act.requestor == AGENT:
                self.pointer += 1
                if act.name == "transfer_to_human":
                    self.closed = True
                return ToolCall(act.name, dict(act.args))
            self.waiting_for_user = True
            return Message(
                f"Please use your {act.name} tool on your phone now, then tell me what you see."
            )
        if self.closed:
            return Message(
                "I have transferred your case to a human specialist. They will take it from here."
            )
        return Message("Great. Is there anything else I can help you with?")


class OracleUser:
    """Executes a queued device action when the agent names its tool, reports
    the output, and ends the dialogue once the task's world assertions hold."""

    def __init__(self, task: CompositeTask, env: Environment):
        self.task = task
        self.env = env
        self.queue = [a for a in task.evaluation.expected_actions if a.requestor == USER]
        self.pos = 0
        self.reported_identity = False
        self.pending_report = False

    def _world_assertions_hold(self) -> bool:
        state = GlobalState(self.env.world, [])
        return all(
            evaluate_assertion(self.env, state, a.function, a.args) == a.expected
            for a in self.task.evaluation.env_assertions
            if a.function != "assert_transfer_occurred"
        )

    def decide(self, view: PolicyView) -> Action:
        if self.pending_report:
            self.pending_report = False
            event = _last_own_tool_event(view)
            payload = ""
            if event is not None and isinstance(event.observation, ToolResult):
                payload = event.observation.render()
            return Message(f"I did that. Here is what my phone shows now:\n{payload}")

        agent_text = _latest_incoming_text(view, AGENT) or ""
        transfer_announced = any(
            word in agent_text.lower() for word in ("transferred", "transferring")
        )
        if transfer_announced and self.task.requires_transfer:
            # Token only after the agent performed the transfer; sending it
            # earlier would end the dialogue before the required tool call.
            return Message(
                f"Thank you for your help so far. I will wait for the specialist. {TRANSFER_TOKEN}"
            )
        if self.pos < len(self.queue) and self.queue[self.pos].name in agent_text:
            act = self.queue[self.pos]
            self.pos += 1
            self.pending_report = True
            return ToolCall(act.name, dict(act.args))
        if not self.reported_identity:
            self.reported_identity = True
            scenario = self.task.user_scenario
            known = scenario.known_info or ""
            return Message(f"Hi there! {scenario.reason_for_call} {known}".strip())
        if self.pos >= len(self.queue) and self._world_assertions_hold():
            if self.task.requires_transfer:
                return Message(
                    "Could you also transfer me to a human specialist for the eSIM move now?"
                )
            return Message(
                f"Thank you so much for your help! Everything seems to be working now. {STOP_TOKEN}"
            )
        return Message("Okay. What should I try next?")


class ComplianceUser(OracleUser):
    """Off-script variant: runs any owned tool the agent names, with no
    arguments; exists to exercise error paths."""

    def decide(self, view: PolicyView) -> Action:
        if self.pending_report:
            return super().decide(view)
        agent_text = _latest_incoming_text(view, AGENT) or ""
        named = [
            spec.name
            for spec in view.tool_specs
            if spec.name in agent_text and spec.owner == USER
        ]
        if named:
            self.pending_report = True
            return ToolCall(named[0], {})
        return super().decide(view)


class NullAgent:
    """Lower-bound control: never calls a tool, never helps."""

    def decide(self, view: PolicyView) -> Action:
        return Message("I'm sorry, I cannot help with that right now.")


# -- external LLM adapter -------------------------------------------------

ENDPOINT_ENV_VAR = "DUET_LLM_ENDPOINT"
KEY_ENV_VAR = "DUET_LLM_KEY"

Transport = Callable[[dict[str, Any]], dict[str, Any]]


@dataclass(frozen=True)
class LlmPolicyConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    max_output_tokens: int = 1024
    retry_budget: int = 2
    request_timeout_s: float = 60.0
    api_key: str | None = None

    @classmethod
    def from_env(cls, model: str, **overrides) -> "LlmPolicyConfig":
        endpoint = os.environ.get(ENDPOINT_ENV_VAR)
        if not endpoint:
            raise PolicyError(f"{ENDPOINT_ENV_VAR} is not set")
        return cls(
            endpoint=endpoint,
            model=model,
            api_key=os.environ.get(KEY_ENV_VAR),
            **overrides,
        )


def _http_transport(config: LlmPolicyConfig) -> Transport:
    import httpx

    def send(payload: dict[str, Any]) -> dict[str, Any]:
        headers = {"Content-Type": "application/json"}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        response = httpx.post(
            config.endpoint, json=payload, headers=headers, timeout=config.request_timeout_s
        )
        response.raise_for_status()
        return response.json()

    return send


class LlmPolicy:
    """Renders the policy view into the chat-completion wire format and parses
    exactly one message or one tool call per decision."""

    def __init__(self, config: LlmPolicyConfig, role: str, transport: Transport | None = None):
        self.config = config
        self.role = role
        self.transport = transport or _http_transport(config)
        self._call_counter = 0

    def _render_messages(self, view: PolicyView) -> list[dict[str, Any]]:
        messages: list[dict[str, Any]] = [{"role": "system", "content": view.instructions}]
        for event in view.visible_history:
            if event.actor == view.role:
                if isinstance(event.action, ToolCall):
                    call_id = f"call_{event.index}"
                    messages.append(
                        {
                            "role": "assistant",
                            "content": None,
                            "tool_calls": [
                                {
                                    "id": call_id,
                                    "type": "function",
                                    "function": {
                                        "name": event.action.name,
                                        "arguments": json.dumps(event.action.args),
                                    },
                                }
                            ],
                        }
                    )
                    rendered = ""
                    if isinstance(event.observation, ToolResult):
                        rendered = event.observation.render()
                        if event.observation.is_error:
                            rendered = f"Error: {rendered}"
                    messages.append({"role": "tool", "tool_call_id": call_id, "content": rendered})
                elif isinstance(event.action, Message):
                    messages.append({"role": "assistant", "content": event.action.text})
            elif isinstance(event.action, Message):
                messages.append({"role": "user", "content": event.action.text})
        return messages

    def decide(self, view: PolicyView) -> Action:
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
            "messages": self._render_messages(view),
            "tools": to_chat_tool_declarations(list(view.tool_specs)),
        }
        last_error: Exception | None = None
        for _ in range(self.config.retry_budget + 1):
            try:
                response = self.transport(payload)
                break
            except Exception as exc:  # transport failure: retry, then give up
                last_error = exc
                time.sleep(0)
        else:
            raise PolicyError(f"transport failed after retries: {last_error}")
        self._call_counter += 1
        return parse_chat_decision(response)


def parse_chat_decision(response: dict[str, Any]) -> Action:
    """Turn one chat-completion response into exactly one Action."""
    try:
        message = response["choices"][0]["message"]
    except (KeyError, IndexError, TypeError) as exc:
        raise PolicyError(f"malformed completion response: {exc}") from exc
    tool_calls = message.get("tool_calls") or []
    content = message.get("content")
    if tool_calls and content:
        raise PolicyError("policy returned both a message and a tool call")
    if len(tool_calls) > 1:
        raise PolicyError("policy returned more than one tool call")
    if tool_calls:
        fn = tool_calls[0].get("function", {})
        name = fn.get("name")
        if not name:
            raise PolicyError("tool call without a name")
        raw_args = fn.get("arguments", "{}")
        try:
            args = json.loads(raw_args) if isinstance(raw_args, str) else dict(raw_args)
        except (json.JSONDecodeError, TypeError) as exc:
            raise PolicyError(f"unparsable tool arguments: {exc}") from exc
        if not isinstance(args, dict):
            raise PolicyError("tool arguments must be an object")
        return ToolCall(name, args)
    if content is None:
        raise PolicyError("policy returned neither a message nor a tool call")
    return Message(str(content))


# -- factories ------------------------------------------------------------

def oracle_agent_factory(task: CompositeTask, env: Environment, config: RunConfig) -> OracleAgent:
    return OracleAgent(task, mode=config.mode)


def oracle_user_factory(task: CompositeTask, env: Environment, config: RunConfig) -> OracleUser:
    return OracleUser(task, env)


def compliance_user_factory(task: CompositeTask, env: Environment, config: RunConfig) -> ComplianceUser:
    return ComplianceUser(task, env)


def null_agent_factory(task: CompositeTask, env: Environment, config: RunConfig) -> NullAgent:
    return NullAgent()


def llm_policy_factory(llm_config: LlmPolicyConfig, role: str):
    def make(task: CompositeTask, env: Environment, config: RunConfig) -> LlmPolicy:
        return LlmPolicy(llm_config, role)

    return make


AGENT_POLICY_FACTORIES = {
    "oracle": oracle_agent_factory,
    "null": null_agent_factory,
}

USER_POLICY_FACTORIES = {
    "oracle": oracle_user_factory,
    "compliance": compliance_user_factory,
}
