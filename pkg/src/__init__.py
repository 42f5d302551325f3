"""Library modules of the qmcltl model checker."""
