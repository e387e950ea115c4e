"""
summary.txt rendering through a Jinja2 sandbox.
Users may supply their own template (output.summary_template); it only
sees the summary context and the filters registered here.
"""
import logging
from typing import Any, Dict, Optional

from jinja2 import StrictUndefined
from jinja2.sandbox import SandboxedEnvironment

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE = """\
scenario: {{ scenario }}
variant: {{ variant }}
mode: {{ mode }}
grid: V={{ extent | sci }} N={{ points }}
final time: {{ final_time | sci }} ({{ records }} records)

final gapU: {{ gap_u | sci }}
final gapT: {{ gap_T | sci }}
final aniso1: {{ aniso1 | sci }}
final aniso2: {{ aniso2 | sci }}

drift mass1: {{ drifts.mass1 | sci }}
drift mass2: {{ drifts.mass2 | sci }}
drift momentum: {{ drifts.momentum | sci }}
drift energy: {{ drifts.energy | sci }}

H initial: {{ initial_H | sci }}
H final: {{ final_H | sci }}
max H increase between records: {{ max_entropy_increase | sci }}
min entropy slope: {{ min_entropy_slope | sci }}
max entropy slope: {{ max_entropy_slope | sci }}
max entropy production: {{ max_entropy_production | sci }}
min lemma2 slack: {{ min_lemma2_slack | sci }}
{% if mu21_roots is defined and mu21_roots %}
mu21 roots: {{ mu21_roots | map('sci') | join(', ') }}
{% endif %}
"""


def _scientific(value: Any) -> str:
    return format(float(value), '.6e')


def create_summary_sandbox() -> SandboxedEnvironment:
    """
    Create the SandboxedEnvironment used for summaries.

    Undefined names raise instead of rendering empty.
    """
    sandbox = SandboxedEnvironment(
        autoescape=False,
        trim_blocks=True,
        lstrip_blocks=True,
        undefined=StrictUndefined,
        keep_trailing_newline=True,
    )
    sandbox.filters['sci'] = _scientific
    return sandbox


_global_sandbox = None


def get_sandbox() -> SandboxedEnvironment:
    global _global_sandbox
    if _global_sandbox is None:
        _global_sandbox = create_summary_sandbox()
    return _global_sandbox


def render_summary(context: Dict[str, Any], template_text: Optional[str] = None) -> str:
    """
    Render summary text.

    Args:
        context: summary numbers (see diagnostics.summarize_run) plus run metadata
        template_text: Jinja2 source; DEFAULT_TEMPLATE when None

    Raises:
        TemplateSyntaxError: if the template does not parse
        UndefinedError: if it references a name missing from the context
        SecurityError: if it reaches for attributes the sandbox forbids
    """
    template = get_sandbox().from_string(template_text or DEFAULT_TEMPLATE)
    text = template.render(**context)
    logger.debug(f"Rendered summary ({len(text)} characters)")
    return text
