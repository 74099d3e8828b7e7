"""MCP server for order book resilience analysis."""
from fastmcp import FastMCP
from loguru import logger

from lobres.config import settings
from lobres.tools import events, models, runs, ted

mcp = FastMCP(
    "lob-resilience",
    instructions="""Limit order book resilience: how long liquidity stays poor.

DATA:
- simulate_days: synthetic order flow and index activity CSVs
- replay_events: event file -> spread or xlm series
- extract_ted: series or events -> threshold exceedance durations (+ 24 covariates from events)

MODELS:
- fit_model: lognormal, gamma, weibull or gengamma; single, two-link or three-link
- select_subsets: best OLS subset of every size on log durations
- quantile_surface: conditional duration quantiles over one or two covariates

BATCH:
- preset_list, preset_get, preset_customize
- run_pipeline: many days, thresholds and families; writes cross-day tables
- report: rebuild cross-day tables of a finished run
""",
)

# ============================================
# Data
# ============================================

mcp.tool()(events.simulate_days)
mcp.tool()(events.replay_events)
mcp.tool()(ted.extract_ted)

# ============================================
# Models
# ============================================

mcp.tool()(models.fit_model)
mcp.tool()(models.select_subsets)
mcp.tool()(models.quantile_surface)

# ============================================
# Batch runs and presets
# ============================================

mcp.tool()(runs.preset_list)
mcp.tool()(runs.preset_get)
mcp.tool()(runs.preset_customize)
mcp.tool()(runs.run_pipeline)
mcp.tool()(runs.report)


def main():
    logger.info("starting lob-resilience MCP server (log level {})", settings.log_level)
    mcp.run()


if __name__ == "__main__":
    main()
