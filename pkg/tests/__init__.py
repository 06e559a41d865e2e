# ETF fingerprinting - tests
