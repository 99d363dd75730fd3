from django.db import models

from blandau_lib.enums import Subcommand

class RunRecord(models.Model):
    subcommand_choices = [(one.value, one.value) for one in Subcommand]

    subcommand = models.CharField(max_length=20, choices=subcommand_choices)
    config = models.TextField()
    seed = models.BigIntegerField(default=0)
    deterministic = models.BooleanField(default=False)

    exit_code = models.IntegerField(default=0)
    summary = models.TextField(blank=True, default='')
    code_version = models.CharField(max_length=40)

    started_at = models.DateTimeField(auto_now_add=True, blank=True)
    wall_time = models.FloatField(null=True, blank=True)

    def __str__(self):
        return f'({self.id}) {self.subcommand} {"OK" if self.exit_code == 0 else f"failed with {self.exit_code}"}'

class RunArtifact(models.Model):
    kind_choices = [
        ('csv', 'Table'),
        ('json', 'Summary'),
    ]

    run = models.ForeignKey('RunRecord', on_delete=models.CASCADE, related_name='artifacts')
    path = models.CharField(max_length=500)
    kind = models.CharField(max_length=4, choices=kind_choices)
    written_at = models.DateTimeField(auto_now_add=True, blank=True)

    def __str__(self):
        return f'({self.id}) {self.path}'
