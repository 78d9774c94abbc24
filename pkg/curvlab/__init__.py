import os

_suites = {
    'verify': 'Verify',
    'analyze': 'Analyze',
    'search': 'Search',
    'catalog': 'Catalog',
    'oracle': 'Oracle'
}


def config_path(command):
    #Defaults of each command live next to its suite
    module_dir = os.path.join(os.path.dirname(__file__), 'scenarios', _suites[command])
    return os.path.join(module_dir, 'config.yaml')
