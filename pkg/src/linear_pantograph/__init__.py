__all__ = [
    'cli', 'config', 'logging_utils', 'errors', 'core_special', 'zero_finder', 'solutions',
    'pantograph_solve', 'general_point', 'bvp_eigen', 'pde_formal', 'oracle_integrator',
    'checks', 'export'
]

__version__ = '0.1.0'
