"""Simulation services and scenario builders."""
