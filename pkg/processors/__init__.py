# Rate fitting, persistence, reports and verification suites
