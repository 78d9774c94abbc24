from .scenarios.Verify.verify import VerifySuite
from .scenarios.Analyze.analyze import AnalyzeSuite
from .scenarios.Search.search import SearchSuite
from .scenarios.Catalog.catalog import CatalogSuite
from .scenarios.Oracle.oracle import OracleSuite
#Add other suite imports here

suite_dict = {'verify': VerifySuite,
              'analyze': AnalyzeSuite,
              'search': SearchSuite,
              'catalog': CatalogSuite,
              'oracle': OracleSuite}


class Wrapper(object):
    def __init__(self, config):
        '''
        Builds the suite of config.command

        Args:
            config (RunConfig): layered run configuration
        '''
        self.suite = suite_dict[config.command](config)

    def run(self):
        return self.suite.run()
