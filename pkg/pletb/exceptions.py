class PletbError(Exception):
    message: str
    code: str = "pletb_error"
    exit_code: int = 5

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self):
        return {"error": self.code, "message": self.message}


class DependencyVersionError(PletbError):
    code = "dependency_version"
    exit_code = 2


class DomainError(PletbError, ValueError):
    code = "domain_error"


class DegenerateShapeError(DomainError):
    code = "degenerate_shape"


class ConfigError(PletbError, ValueError):
    code = "config_error"
    exit_code = 2


class ScanParseError(PletbError):
    code = "scan_parse_error"
    exit_code = 4
    line: int

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line

    def to_dict(self):
        return {"error": self.code, "message": self.message, "line": self.line}


class EstimatorError(PletbError):
    code = "estimator_error"


class DegenerateModelError(PletbError):
    code = "degenerate_model"


class CannotBinError(PletbError):
    code = "cannot_bin"


class BinningError(PletbError):
    code = "binning_error"


class GridSearchError(PletbError):
    code = "grid_search_error"
