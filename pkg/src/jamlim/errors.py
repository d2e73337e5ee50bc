class BudgetExceeded(RuntimeError):
    """Armour exploration would exceed its site budget.

    Raised instead of returning a truncated armour. ``sites`` is the count
    reached, ``budget`` the limit, ``seed`` the field seed when known.
    """

    def __init__(self, sites: int, budget: int, seed: int | None = None):
        self.sites = sites
        self.budget = budget
        self.seed = seed
        where = "" if seed is None else f" (seed {seed})"
        super().__init__(f"armour exploration reached {sites} sites, budget is {budget}{where}")
