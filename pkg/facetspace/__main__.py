"""Allow ``python -m facetspace``."""

from .cli import app
from .const import NAME

app(prog_name=NAME)
