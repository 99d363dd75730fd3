# ------------------------------------------------ #
# Contains the exceptions used in the blandau      #
# library. Every exception belongs to one family   #
# and each family carries the exit code that the   #
# command line reports when it is raised.          #
# ------------------------------------------------ #

class BlandauError(Exception):
    '''A base class for every exception raised by the blandau library.'''
    exit_code = 1

# ----------------------------------------
# Error families
# ----------------------------------------

class ConfigError(BlandauError):
    '''Raised when parameters or a run configuration are invalid.'''
    exit_code = 2

class NumericalError(BlandauError):
    '''A base class for failures of a numerical routine.'''
    exit_code = 3

class NotConvergedError(BlandauError):
    '''A base class for iterations that did not reach their stopping criterion.'''
    exit_code = 4

class IoError(BlandauError):
    '''Raised when an artifact could not be read or written.'''
    exit_code = 5

# ----------------------------------------
# Numerical failures
# ----------------------------------------

class NoRoot(NumericalError):
    '''The mean-field cubic has no positive real root.'''
    pass

class AmbiguousBranch(NumericalError):
    '''The drive lies in the bistable window and no branch was selected.'''
    pass

class GaplessOrUnstable(NumericalError):
    '''The Bogoliubov spectrum is gapless or dynamically unstable.'''
    pass

class NumericalBlowup(NumericalError):
    '''
    A stochastic trajectory left the physical range of amplitudes

    ## Parameters
    - `trajectory` (int): The index of the offending trajectory, if known
    '''

    def __init__(self, message:str, trajectory:int = None):
        super().__init__(message)
        self.trajectory = trajectory

    def __reduce__(self):
        # Keeps the trajectory index when raised inside a worker process
        return (self.__class__, (str(self), self.trajectory))

class StiffnessFailure(NumericalError):
    '''The adaptive step size underflowed its lower bound.'''
    pass

class SingularSystem(NumericalError):
    '''
    The hard-cutoff linear system could not be solved

    ## Parameters
    - `condition` (float): A 1-norm condition number estimate, `inf` when the
    factorization itself failed
    '''

    def __init__(self, message:str, condition:float = float('inf')):
        super().__init__(message)
        self.condition = condition

class SingularResponse(NumericalError):
    '''The 2x2 disorder response matrix is singular.'''
    pass

class InternalMismatch(NumericalError):
    '''An assembled coupling connects correlators that do not conserve momentum.'''
    pass

class TooLarge(NumericalError):
    '''The number of correlators exceeds the configured cap.'''
    pass

class ZeroMomentumArm(NumericalError):
    '''A detection arm points at the condensate mode.'''
    pass

class Evanescent(NumericalError):
    '''The emission angle of a mode does not exist (sine argument above one).'''
    pass

# ----------------------------------------
# Convergence failures
# ----------------------------------------

class NotConverged(NotConvergedError):
    '''
    An integration did not reach its steady-state criterion

    ## Parameters
    - `t` (float): The time (units of 1/γ) at which the integration gave up
    '''

    def __init__(self, message:str, t:float = None):
        super().__init__(message)
        self.t = t
