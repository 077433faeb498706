from perfsentry.cli import entry

entry()
