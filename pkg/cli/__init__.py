from cli.main import CliConfig, build_parser, main
