"""Exception types shared across the library and mapped to CLI exit codes."""


class InputError(ValueError):
    """Malformed instance data, flags, or operation preconditions. CLI exit 1."""


class OracleCapError(InputError):
    """Brute-force request exceeds the configured size caps; message carries a cost estimate."""


class BudgetExceededError(RuntimeError):
    """Search budget ran out. Carries the best allocation found so far (may be None). CLI exit 2."""

    def __init__(self, message, best_allocation=None, best_envy=None):
        super().__init__(message)
        self.best_allocation = best_allocation
        self.best_envy = best_envy


class ContractViolationError(RuntimeError):
    """A demand function broke its behavioral contract. CLI exit 3."""


class HungryViolationError(ContractViolationError):
    """A demand returned an empty piece, or nothing at all."""

    def __init__(self, player, partition, index=None):
        self.player = player
        self.partition = partition
        self.index = index
        if index is None:
            msg = f"player {player} returned an empty demand set on {partition}"
        else:
            msg = (f"player {player} demanded zero-length piece {index} "
                   f"on partition {partition}")
        super().__init__(msg)
