"""
Process exit codes
The CLI maps every outcome to one of these.
"""

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_DATA_ERROR = 2
EXIT_ESTIMATION_FAILURES = 3

status_text = {
    EXIT_OK: 'OK',
    EXIT_CONFIG_ERROR: 'Config Error',
    EXIT_DATA_ERROR: 'Data Error',
    EXIT_ESTIMATION_FAILURES: 'Estimation Failures Present',
}
