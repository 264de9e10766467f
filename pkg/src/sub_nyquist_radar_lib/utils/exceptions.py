class RadarLibError(Exception):
    pass


class DomainError(RadarLibError, ValueError):
    pass


class ConfigError(RadarLibError, ValueError):
    pass


class ContractViolation(RadarLibError, ValueError):
    pass


class EstimationFailure(RadarLibError):
    def __init__(self, message: str, diagnostics: dict | None = None, stage: str | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.stage = stage


class RankDeficiencyError(EstimationFailure):
    def __init__(self, message: str, report=None, colliding_pairs: list | None = None,
                 stage: str | None = None):
        diagnostics = {}
        if report is not None:
            diagnostics["rank_margin"] = report.margin
            diagnostics["min_singular_value"] = report.min_singular_value
        if colliding_pairs:
            diagnostics["colliding_pairs"] = colliding_pairs
        super().__init__(message, diagnostics=diagnostics, stage=stage)
        self.report = report
        self.colliding_pairs = colliding_pairs or []
