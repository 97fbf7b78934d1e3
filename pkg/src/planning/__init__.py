"""World model and sparse tree-search planner."""
