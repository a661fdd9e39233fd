from typing import *
from abc import ABC, abstractmethod


class BaselineCheck(ABC):
    """Abstract validation run to be inherited by each baseline check"""
    def __init__(self) -> None:
        self.name: str = ""
        self.threshold: float = 0.0
        self._latency: int = 0

    @abstractmethod
    def measure(self, seed: int) -> float:
        """Run the check's simulation and return the measured quantity"""
        raise NotImplementedError("Each check should implement this method")

    @abstractmethod
    def passes(self, value: float) -> bool:
        raise NotImplementedError("Each check should implement this method")

    def calculate_latency(self) -> int:
        return self._latency
