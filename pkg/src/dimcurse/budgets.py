"""Budget factorization and doubling-trick epoch schedules."""

from __future__ import annotations

from dataclasses import dataclass

from .types import BudgetSchedule


def integer_root_floor(n: int, d: int) -> int:
    """Largest integer k with k**d <= n, by integer search (no bare float pow)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    k = max(1, int(round(n ** (1.0 / d))))
    while k**d > n:
        k -= 1
    while (k + 1) ** d <= n:
        k += 1
    return k


def split_budget(total: int, dimension: int) -> tuple[int, ...]:
    """Factor a total budget T into per-dimension budgets.

    Each factor is floor(T**(1/d)) or ceil(T**(1/d)); factors are
    nondecreasing (ceilings in the deeper dimensions) and the product is the
    smallest one >= T attainable this way, which keeps it within
    ceil/floor * T.
    """
    if total < 1:
        raise ValueError(f"total budget must be positive, got {total}")
    if dimension < 1:
        raise ValueError(f"dimension must be positive, got {dimension}")
    k = integer_root_floor(total, dimension)
    if k**dimension == total:
        return (k,) * dimension
    for n_ceil in range(1, dimension + 1):
        if k ** (dimension - n_ceil) * (k + 1) ** n_ceil >= total:
            return (k,) * (dimension - n_ceil) + (k + 1,) * n_ceil
    raise AssertionError("unreachable: (k+1)**d >= total by choice of k")


def schedule_for(total: int, dimension: int) -> BudgetSchedule:
    return BudgetSchedule.with_default_noise(split_budget(total, dimension))


@dataclass(frozen=True)
class EpochSchedule:
    """Doubling-trick epochs [1, 2, 4, ..., 2**(N-1), C] summing to T."""

    epochs: tuple[int, ...]
    n_doublings: int
    remainder: int

    def total(self) -> int:
        return sum(self.epochs)


def doubling_epochs(total: int) -> EpochSchedule:
    """Split an unknown-horizon budget T into doubling epochs.

    N is the unique integer with 2**N - 1 < T <= 2**(N+1) - 1 and the final
    epoch carries the remainder C = T - (2**N - 1), so 1 <= C <= 2**N.
    """
    if total < 1:
        raise ValueError(f"total budget must be positive, got {total}")
    n = total.bit_length() - 1
    remainder = total - (2**n - 1)
    epochs = tuple(2**i for i in range(n)) + (remainder,)
    return EpochSchedule(epochs=epochs, n_doublings=n, remainder=remainder)
