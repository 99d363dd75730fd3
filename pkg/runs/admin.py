from django.contrib import admin

from .models import RunArtifact, RunRecord

admin.site.register(RunRecord)
admin.site.register(RunArtifact)
