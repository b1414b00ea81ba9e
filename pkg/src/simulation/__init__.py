# Monte Carlo simulator package initialization
