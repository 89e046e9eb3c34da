"""Wall-crossing for compactified universal Jacobians on stable graph strata."""
