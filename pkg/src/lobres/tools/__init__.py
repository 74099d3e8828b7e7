"""Tool functions exposed by the MCP server and reused by the CLI."""
