"""MCP server for spray_geometry."""
