"""Hidden-event estimation from right-truncated observation data."""

from ._hidden_events import kaplan_meier, percentage_error, propose_bins, run

__all__ = ["run", "kaplan_meier", "propose_bins", "percentage_error"]
