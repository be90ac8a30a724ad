# OFDM interference analysis: operators, SINR, rate, TEQ design, Monte Carlo and the LangGraph workflows
