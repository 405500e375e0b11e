from .coupling import CouplingLayer, FlowConfig, FlowStack

__all__ = ["CouplingLayer", "FlowConfig", "FlowStack"]
