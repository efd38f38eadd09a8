import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from coexistApp.exceptions import CoexistError, ConfigError
from coexistApp.experiments import SUBCOMMANDS, load_config, write_config
from coexistApp.validation import run_validation

logger = logging.getLogger(__name__)

VALIDATE = "validate"


class Command(BaseCommand):
    help = (
        "Radar / cellular coexistence experiments: average interference, interference "
        "distributions, ROC curves, minimum exclusion radius and analytic-vs-Monte-Carlo validation."
    )

    def add_arguments(self, parser):
        parser.add_argument("subcommand", choices=[*SUBCOMMANDS, VALIDATE])
        parser.add_argument("--config", help="INI file; sections it contains replace the defaults")
        parser.add_argument("--out", default=str(settings.COEXIST_OUTPUT_DIR), help="output directory")
        parser.add_argument("--seed", type=int, help="override mc.seed")
        parser.add_argument("--trials", type=int, help="override mc.trials")
        parser.add_argument(
            "--set", action="append", default=[], dest="overrides", metavar="SECTION.KEY=VALUE",
            help="override one config value (repeatable)",
        )
        parser.add_argument("--workers", type=int, default=settings.COEXIST_WORKERS)

    def handle(self, *args, **options):
        overrides = list(options["overrides"])
        if options["seed"] is not None:
            overrides.append(f"mc.seed={options['seed']}")
        if options["trials"] is not None:
            overrides.append(f"mc.trials={options['trials']}")

        try:
            config = load_config(options["config"], overrides)
        except ConfigError as exc:
            for line in exc.diagnostics:
                self.stderr.write(line)
            raise CommandError(f"invalid configuration ({len(exc.diagnostics)} problem(s))", returncode=2)

        out_dir = Path(options["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        write_config(config, out_dir / "config.ini")
        subcommand = options["subcommand"]
        workers = max(1, options["workers"])
        logger.info("running %s into %s with %d worker(s)", subcommand, out_dir, workers)

        try:
            if subcommand == VALIDATE:
                path, passed = run_validation(config, out_dir, workers)
                paths = [path]
            else:
                paths = SUBCOMMANDS[subcommand](config, out_dir, workers)
                passed = True
        except CoexistError as exc:
            raise CommandError(f"{subcommand} failed: {exc}", returncode=1)

        for path in paths:
            self.stdout.write(str(path))
        if not passed:
            raise CommandError(f"validation failed, see {paths[0]}", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"{subcommand} done"))
