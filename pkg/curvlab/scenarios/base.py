from dataclasses import dataclass, field

from curvlab.utilities.reports import build_document, to_csv, to_json


@dataclass
class SuiteResult:
    '''
    What a suite hands back to the run loop: the report document, the rows used for CSV
    output and any extra files (path -> text) to write before the report
    '''
    document: dict
    rows: list = field(default_factory=list)
    failed: bool = False
    files: dict = field(default_factory=dict)
    report_path: str = None

    @property
    def exit_code(self):
        return 1 if self.failed else 0

    def render(self, fmt):
        return to_csv(self.rows) if fmt == 'csv' else to_json(self.document)


class BaseSuite(object):
    '''
    Template for what a command suite must have
    Additionally, it must have the class variable `command`
    '''
    command = None

    def __init__(self, config):
        self.config = config

    def run(self):
        #Must return a SuiteResult
        raise NotImplementedError()

    def document(self, **payload):
        return build_document(self.command, self.config.to_dict(), **payload)

    def budget(self, name, default=1.0):
        #Draw count of a sub-check: samples scaled by options.budgets.<name>
        scale = self.config.option('budgets', name, default=default)
        return max(1, int(round(self.config.samples * float(scale))))

    def tolerance(self, name, default=1.0):
        return self.config.tol * float(self.config.option('tol_scales', name, default=default))
