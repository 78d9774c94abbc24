class CurvlabError(Exception):
    '''
    Base class for every error raised by curvlab
    '''


class ConfigError(CurvlabError):
    #Bad flags, unknown config keys or invalid environment values. Exit code 2.
    pass


class InputError(CurvlabError):
    #Unreadable or malformed input files. Exit code 2.
    pass


class AlgebraError(InputError):
    #Structure constants failing antisymmetry, Jacobi or ad-invariance
    pass


class DimensionError(CurvlabError, ValueError):
    pass


class MetricError(CurvlabError, ValueError):
    #Metric form that is not self-adjoint or not positive-definite
    pass


class StructureError(CurvlabError, ValueError):
    #Subspace lacking a required algebraic property, or a non bi-invariant M
    pass


class CommutingError(CurvlabError, ValueError):
    pass


class DegenerateError(CurvlabError, ValueError):
    #Zero vectors or degenerate planes where a nonzero input is required
    pass


class DomainError(CurvlabError, ValueError):
    '''
    Raised when t lies outside (or within 1e-12 of a pole of) the domain of an inverse-linear path
    '''

    def __init__(self, t, eigenvalue, domain):
        self.t = t
        self.eigenvalue = eigenvalue
        self.domain = domain
        super().__init__(f't={t!r} is outside the path domain ({domain.lower!r}, {domain.upper!r}); '
                         f'offending eigenvalue {eigenvalue!r}')


class ConstraintError(CurvlabError, ValueError):
    '''
    Raised when a torus-form block exceeds the 4/3 bound
    '''

    def __init__(self, message, direction):
        self.direction = direction
        super().__init__(message)
