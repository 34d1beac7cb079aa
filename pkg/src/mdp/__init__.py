"""MDP data model package."""
