__version__ = '0.0.0'
__git_commit__ = 'HEAD'
