"""Diagrammatic operational semantics for digital circuits."""
