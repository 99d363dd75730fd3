# -------------------------------------------------- #
# This file contains the enums used in the blandau   #
# library. In most cases, the enum maps to a string  #
# that has the same value as the name used on the    #
# command line and in the configuration files.       #
# -------------------------------------------------- #

from enum import Enum

class Subcommand(Enum):
    '''
    All of the subcommands of the command line

    ## Description
    Each subcommand dispatches to one module of the library. The value is the name
    that is typed on the command line and used as the section of the run
    configuration file.
    '''

    bogoliubov  = "bogoliubov"
    contour     = "contour"
    twa         = "twa"
    hoc         = "hoc"
    hc_compare  = "hc_compare"
    disorder    = "disorder"
    observables = "observables"

class Branch(Enum):
    '''
    The branch of the mean-field bistability curve to pick

    ## Description
    When the drive amplitude is given the mean-field density solves a cubic which may
    have up to three positive roots. The roots are sorted by density and named here.
    '''

    lower   = "lower"
    middle  = "middle"
    upper   = "upper"

class Scheme(Enum):
    '''
    The truncation schemes of the correlation hierarchy

    ## Description
    `FC` is the factorized cutoff evolved by the `hoc` module, `HC<n>` is the hard
    cutoff at order n solved by the `hc` module.
    '''

    FC  = "FC"
    HC2 = "HC2"
    HC3 = "HC3"
    HC4 = "HC4"
    HC5 = "HC5"
    HC6 = "HC6"

    @property
    def cutoff(self) -> int:
        '''The truncation order of a hard-cutoff scheme, `None` for the factorized one.'''
        return None if self is Scheme.FC else int(self.value[2:])

class TermGroup(Enum):
    '''
    The groups of couplings that the fluctuation Hamiltonian produces

    ## Description
    Every coupling of the hard-cutoff system is tagged with one of these groups so
    that each nonzero matrix entry can be traced back to the term that created it.
    '''

    detuning_loss       = "detuning_loss"       # (ε_q + 2U|ψ0|²) and the γ/2 loss per operator
    pair_creation       = "pair_creation"       # U ψ0² pair terms
    pair_annihilation   = "pair_annihilation"   # U ψ0*² pair terms
    cubic_psi0          = "cubic_psi0"          # U ψ0 / √L triple sums
    cubic_psi0_conj     = "cubic_psi0_conj"     # U ψ0* / √L triple sums
    quartic             = "quartic"             # U / L quartic sum

QUADRATIC_GROUPS = frozenset({
    TermGroup.detuning_loss,
    TermGroup.pair_creation,
    TermGroup.pair_annihilation,
})
ALL_GROUPS = frozenset(TermGroup)
